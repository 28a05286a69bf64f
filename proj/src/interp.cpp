#include "pcinterp/interp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcinterp {

namespace {

cd unit_phase(double x) { return cd(std::cos(x), std::sin(x)); }

bool uses_grid_form(const DensitySpec& f, const DensitySpec* g) {
  bool a = std::holds_alternative<GridForm>(f.form());
  bool b = g && std::holds_alternative<GridForm>(g->form());
  return a || b;
}

// Evaluates the polynomial sum_{j in keys} v(j) e^{i j lambda}.
Vector eval_coeff_poly(const VectorCoeffs& coeffs, int dim, double lambda) {
  Vector out = Vector::Zero(dim);
  for (const auto& [j, v] : coeffs) out += v * unit_phase(j * lambda);
  return out;
}

std::vector<Matrix> inverse_samples(const DensitySpec& f, const DensitySpec* g,
                                    int n) {
  auto fn = [&](double lambda) {
    Matrix m = f.evaluate(lambda);
    if (g) m += g->evaluate(lambda);
    return m.inverse().eval();
  };
  return sample_grid(fn, n);
}

// h(lambda) for the two modes: A - W^T C (noiseless) or W^T (f^T A - C).
Vector characteristic_value(const DensitySpec& f, const DensitySpec* g,
                            const VectorCoeffs& a, const VectorCoeffs& c,
                            double lambda) {
  const int dim = f.dim();
  Vector av = eval_coeff_poly(a, dim, lambda);
  Vector cv = eval_coeff_poly(c, dim, lambda);
  Matrix fm = f.evaluate(lambda);
  if (!g) {
    Matrix w = fm.inverse();
    return av - w.transpose() * cv;
  }
  Matrix w = (fm + g->evaluate(lambda)).inverse();
  return w.transpose() * (fm.transpose() * av - cv);
}

void validate_support(const VectorCoeffs& a, const MissingPattern& pattern,
                      int dim) {
  if (static_cast<long>(a.size()) != pattern.size())
    throw SchemaError("functional support must equal the missing set");
  for (const auto& [j, v] : a) {
    if (!pattern.contains(j))
      throw SchemaError("functional coefficient outside the missing set");
    if (v.size() != dim)
      throw DimensionMismatch("functional coefficient has wrong dimension");
  }
}

}  // namespace

BlockMatrices assemble_block_matrices(const DensitySpec& f,
                                      const DensitySpec* g,
                                      const MissingPattern& pattern,
                                      const Quadrature& quad) {
  auto report = check_minimality(f, g, quad);
  if (!report.ok) {
    std::ostringstream msg;
    msg << "minimality condition violated: min eigenvalue "
        << report.min_eigenvalue << ", condition " << report.max_condition;
    throw MinimalityViolation(msg.str());
  }

  BlockMatrices bm;
  bm.dim = f.dim();
  bm.slots = pattern.indices();
  bm.noiseless = (g == nullptr);

  const int dim = bm.dim;
  const long rho = static_cast<long>(bm.slots.size());
  const long n = rho * dim;

  std::vector<int> lags;
  for (long k : bm.slots)
    for (long j : bm.slots) lags.push_back(static_cast<int>(k - j));

  std::map<int, Matrix> wc, dc, rc;
  std::optional<TrigMatrixPoly> wpoly;
  if (bm.noiseless) wpoly = f.analytic_inverse();
  if (wpoly) {
    for (int lag : lags) wc[lag] = wpoly->coeff(lag);
  } else {
    auto wsamples = inverse_samples(f, g, quad.grid_n);
    wc = fourier_table(wsamples, lags);
    if (!bm.noiseless) {
      auto grid = quad_grid(quad.grid_n);
      std::vector<Matrix> dsamples(grid.size()), rsamples(grid.size());
      for (size_t t = 0; t < grid.size(); ++t) {
        Matrix fm = f.evaluate(grid[t]);
        Matrix gm = g->evaluate(grid[t]);
        dsamples[t] = fm * wsamples[t];
        rsamples[t] = fm * wsamples[t] * gm;
      }
      dc = fourier_table(dsamples, lags);
      rc = fourier_table(rsamples, lags);
    }
  }

  bm.b = Matrix::Zero(n, n);
  bm.d = Matrix::Identity(n, n);
  bm.r = Matrix::Zero(n, n);
  for (long ki = 0; ki < rho; ++ki) {
    for (long ji = 0; ji < rho; ++ji) {
      int lag = static_cast<int>(bm.slots[ki] - bm.slots[ji]);
      bm.b.block(ki * dim, ji * dim, dim, dim) = wc[lag].transpose();
      if (!bm.noiseless) {
        bm.d.block(ki * dim, ji * dim, dim, dim) = dc[lag].transpose();
        bm.r.block(ki * dim, ji * dim, dim, dim) = rc[lag].transpose();
      }
    }
  }
  // Quadrature dust must not break the Hermitian solvers downstream.
  bm.b = 0.5 * (bm.b + bm.b.adjoint().eval());
  if (!bm.noiseless) bm.r = 0.5 * (bm.r + bm.r.adjoint().eval());
  return bm;
}

Vector stack_functional(const VectorCoeffs& a, const MissingPattern& pattern,
                        int dim) {
  validate_support(a, pattern, dim);
  auto slots = pattern.indices();
  Vector out(static_cast<long>(slots.size()) * dim);
  for (size_t i = 0; i < slots.size(); ++i)
    out.segment(i * dim, dim) = a.at(slots[i]);
  return out;
}

VectorCoeffs scatter_vector(const Vector& v, const MissingPattern& pattern,
                            int dim) {
  auto slots = pattern.indices();
  if (v.size() != static_cast<long>(slots.size()) * dim)
    throw DimensionMismatch("stacked vector size does not match pattern");
  VectorCoeffs out;
  for (size_t i = 0; i < slots.size(); ++i)
    out[slots[i]] = v.segment(i * dim, dim);
  return out;
}

Vector solve_coefficients(const BlockMatrices& bm, const Vector& a_s,
                          double* condition_out) {
  const long n = bm.b.rows();
  if (a_s.size() != n)
    throw DimensionMismatch("functional vector does not match block matrices");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(bm.b, Eigen::EigenvaluesOnly);
  double lo = eig.eigenvalues().minCoeff();
  double hi = eig.eigenvalues().maxCoeff();
  double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (condition_out) *condition_out = cond;
  if (!(cond < kConditionCeiling))
    throw SingularSystem("B_s is numerically singular; condition " +
                             std::to_string(cond),
                         cond);

  Vector rhs = bm.d * a_s;
  Eigen::LDLT<Matrix> ldlt(bm.b);
  Vector c = ldlt.solve(rhs);
  c += ldlt.solve(rhs - bm.b * c);

  double rel = (bm.b * c - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (rhs.norm() == 0.0) rel = (bm.b * c).norm();
  if (rel > 1e-10)
    throw NumericalError("coefficient solve residual too large: " +
                         std::to_string(rel));
  return c;
}

std::map<long, Vector> spectral_characteristic(const DensitySpec& f,
                                               const DensitySpec* g,
                                               const MissingPattern& pattern,
                                               const VectorCoeffs& a,
                                               const VectorCoeffs& c,
                                               const Quadrature& quad) {
  const int dim = f.dim();
  validate_support(a, pattern, dim);

  std::map<long, Vector> taps;
  std::optional<TrigMatrixPoly> wpoly;
  if (!g) wpoly = f.analytic_inverse();

  if (wpoly) {
    // h_j = [j in S] a(j) - sum_k W(j-k)^T c(k); exact, finite support.
    int deg = wpoly->degree();
    long lo = pattern.first() - deg;
    long hi = pattern.last() + deg;
    double max_norm = 0.0;
    std::map<long, Vector> raw;
    for (long j = lo; j <= hi; ++j) {
      Vector h = Vector::Zero(dim);
      if (a.count(j)) h += a.at(j);
      for (const auto& [k, ck] : c) {
        int lag = static_cast<int>(j - k);
        if (std::abs(lag) <= deg)
          h -= wpoly->coeff(lag).transpose() * ck;
      }
      raw[j] = h;
      max_norm = std::max(max_norm, h.cwiseAbs().maxCoeff());
    }
    for (auto& [j, h] : raw) {
      if (pattern.contains(j)) continue;  // zero by the defining equations
      if (h.cwiseAbs().maxCoeff() > 1e-13 * std::max(1.0, max_norm))
        taps[j] = h;
    }
    return taps;
  }

  int n = std::max(quad.grid_n, 8192);
  if (uses_grid_form(f, g)) n = quad.grid_n;
  auto grid = quad_grid(n);
  std::vector<Vector> samples(grid.size());
  for (size_t t = 0; t < grid.size(); ++t)
    samples[t] = characteristic_value(f, g, a, c, grid[t]);
  auto all = fourier_taps(samples);

  double total = 0.0;
  for (const auto& [j, h] : all) total += h.squaredNorm();
  if (total == 0.0) return taps;

  // Smallest symmetric window holding all but 1e-10 of the tap energy.
  long window = 0;
  {
    std::map<long, double> by_abs;
    for (const auto& [j, h] : all) by_abs[std::labs(j)] += h.squaredNorm();
    double acc = 0.0;
    for (const auto& [l, e] : by_abs) {
      acc += e;
      if (acc >= (1.0 - 1e-10) * total) {
        window = l;
        break;
      }
    }
  }

  double max_norm = 0.0;
  for (const auto& [j, h] : all) max_norm = std::max(max_norm, h.cwiseAbs().maxCoeff());
  for (const auto& [j, h] : all) {
    if (std::labs(j) > window || pattern.contains(j)) continue;
    if (h.cwiseAbs().maxCoeff() > 1e-12 * max_norm) taps[j] = h;
  }
  return taps;
}

double mean_square_error(const Vector& a_s, const Vector& c_s,
                         const BlockMatrices& bm) {
  if (a_s.size() != bm.b.rows() || c_s.size() != bm.b.rows())
    throw DimensionMismatch("vector sizes do not match block matrices");
  cd value = a_s.dot(bm.r * a_s) + c_s.dot(bm.b * c_s);
  if (std::abs(value.imag()) > 1e-8 * std::max(1.0, std::abs(value.real())))
    throw NumericalError("mean square error came out non-real");
  return std::max(0.0, value.real());
}

cd estimate_functional(const std::map<long, Vector>& taps,
                       const std::map<long, Vector>& observations,
                       const MissingPattern& pattern) {
  cd acc(0.0, 0.0);
  for (const auto& [j, h] : taps) {
    if (pattern.contains(j)) continue;
    auto it = observations.find(j);
    if (it == observations.end())
      throw MissingObservation(
          "filter needs an observation at index " + std::to_string(j), j);
    if (it->second.size() != h.size())
      throw DimensionMismatch("observation dimension mismatch");
    acc += (h.array() * it->second.array()).sum();
  }
  return acc;
}

std::map<long, double> verify_orthogonality(const DensitySpec& f,
                                            const DensitySpec* g,
                                            const MissingPattern& pattern,
                                            const VectorCoeffs& a,
                                            const VectorCoeffs& c,
                                            const Quadrature& quad) {
  auto grid = quad_grid(quad.grid_n);
  std::vector<Vector> samples(grid.size());
  for (size_t t = 0; t < grid.size(); ++t)
    samples[t] = characteristic_value(f, g, a, c, grid[t]);

  std::map<long, double> residuals;
  for (long j : pattern.indices()) {
    Vector acc = Vector::Zero(f.dim());
    for (size_t t = 0; t < grid.size(); ++t)
      acc += samples[t] * unit_phase(-static_cast<double>(j) * grid[t]);
    residuals[j] = (acc / static_cast<double>(grid.size())).norm();
  }
  return residuals;
}

double error_functional(const DensitySpec& f, const DensitySpec* g,
                        const VectorCoeffs& a,
                        const std::map<long, Vector>& taps,
                        const Quadrature& quad) {
  const int dim = f.dim();
  double acc = 0.0;
  for (double lambda : quad_grid(quad.grid_n)) {
    Vector av = eval_coeff_poly(a, dim, lambda);
    Vector hv = eval_coeff_poly(taps, dim, lambda);
    Vector diff = av - hv;
    Matrix fm = f.evaluate(lambda);
    cd sig = diff.transpose() * (fm * diff.conjugate());
    acc += sig.real();
    if (g) {
      Matrix gm = g->evaluate(lambda);
      cd noi = hv.transpose() * (gm * hv.conjugate());
      acc += noi.real();
    }
  }
  return acc / quad.grid_n;
}

InterpSolution interpolate(const DensitySpec& f, const DensitySpec* g,
                           const MissingPattern& pattern,
                           const VectorCoeffs& a, const Quadrature& quad) {
  InterpSolution sol;
  auto bm = assemble_block_matrices(f, g, pattern, quad);
  Vector a_s = stack_functional(a, pattern, bm.dim);
  sol.c = solve_coefficients(bm, a_s, &sol.diagnostics.condition);
  sol.c_coeffs = scatter_vector(sol.c, pattern, bm.dim);
  sol.delta = mean_square_error(a_s, sol.c, bm);
  sol.taps = spectral_characteristic(f, g, pattern, a, sol.c_coeffs, quad);
  sol.diagnostics.orthogonality =
      verify_orthogonality(f, g, pattern, a, sol.c_coeffs, quad);
  return sol;
}

}  // namespace pcinterp
