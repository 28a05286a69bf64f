#include "pcinterp/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace pcinterp {

namespace {

cd unit_phase(double x) { return cd(std::cos(x), std::sin(x)); }

void require_starts_at_zero(const MissingPattern& pattern) {
  if (pattern.first() != 0)
    throw UnsupportedPattern(
        "least-favorable constructions index the blocked pattern from 0");
}

void check_hermitian(const Matrix& m, const char* what) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw SchemaError(std::string(what) + " must be Hermitian");
}

double grid_min_eigenvalue(const TrigMatrixPoly& w, const Quadrature& quad) {
  double lo = std::numeric_limits<double>::infinity();
  for (double lambda : quad_grid(quad.grid_n)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(w.eval(lambda),
                                              Eigen::EigenvaluesOnly);
    lo = std::min(lo, eig.eigenvalues().minCoeff());
  }
  return lo;
}

// Shared tail: hypothesis check, factorization, and the certainty-case run
// against f0.
void finish_solution(MinimaxSolution& sol, const VectorCoeffs& a,
                     const MissingPattern& pattern, const Quadrature& quad,
                     bool taps_from_pipeline) {
  sol.hypothesis.min_eigenvalue = grid_min_eigenvalue(sol.inverse_density, quad);
  sol.hypothesis.positive_definite =
      sol.hypothesis.min_eigenvalue > kEigenvalueFloor;
  if (!sol.hypothesis.positive_definite) {
    std::ostringstream msg;
    msg << "assembled inverse density is not positive definite on the grid "
           "(min eigenvalue "
        << sol.hypothesis.min_eigenvalue << ")";
    throw HypothesisViolated(msg.str());
  }

  sol.f0 = DensitySpec::inverse_trig(sol.inverse_density);
  sol.factor = spectral_factorize(sol.inverse_density, quad.tol);

  auto bm = assemble_block_matrices(sol.f0, nullptr, pattern, quad);
  Vector a_s = stack_functional(a, pattern, bm.dim);
  sol.c0 = solve_coefficients(bm, a_s);
  sol.c0_coeffs = scatter_vector(sol.c0, pattern, bm.dim);
  sol.delta0 = mean_square_error(a_s, sol.c0, bm);
  if (taps_from_pipeline)
    sol.taps =
        spectral_characteristic(sol.f0, nullptr, pattern, a, sol.c0_coeffs, quad);
}

}  // namespace

Vector pseudo_inverse_lead(const Vector& a0) {
  double n2 = a0.squaredNorm();
  if (n2 == 0.0) throw ZeroVector("leading functional coefficient is zero");
  return a0.conjugate() / n2;
}

MinimaxSolution least_favorable_d0(const ClassD0Spec& spec,
                                   const VectorCoeffs& a,
                                   const MissingPattern& pattern,
                                   const Quadrature& quad,
                                   const Vector* lead_override) {
  const int dim = static_cast<int>(spec.p.rows());
  check_hermitian(spec.p, "P");
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.p, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0)
      throw SchemaError("P must be positive definite");
  }
  require_starts_at_zero(pattern);

  auto it0 = a.find(0);
  if (it0 == a.end() || it0->second.squaredNorm() == 0.0)
    throw ZeroVector("the D0 construction needs a(0) != 0");
  const Vector a0 = it0->second;

  Vector v;
  if (lead_override) {
    v = *lead_override;
    cd pairing = (v.array() * a0.array()).sum();
    if (std::abs(pairing - cd(1.0, 0.0)) > 1e-10)
      throw SchemaError("lead inverse override must satisfy v^T a(0) = 1");
  } else {
    v = pseudo_inverse_lead(a0);
  }

  MinimaxSolution sol{TrigMatrixPoly(dim), DensitySpec::constant(spec.p),
                      CausalFactor{},      {},
                      Vector(),            {},
                      {},                  0.0,
                      {}};
  sol.inverse_density.set_pair(0, spec.p);
  const Vector pv = spec.p * v;
  for (long k : pattern.indices()) {
    if (k == 0) continue;
    Matrix rk = pv * a.at(k).transpose();
    sol.inverse_density.set_pair(static_cast<int>(k), rk);
  }

  finish_solution(sol, a, pattern, quad, /*taps_from_pipeline=*/false);

  // h(f0) = -sum_{k>=1} conj(R(k)) (P^T)^{-1} a(0) e^{-i k lambda}.
  const Vector alpha = spec.p.transpose().inverse() * a0;
  sol.multipliers[0] = alpha;
  for (long k = 1; k <= pattern.last(); ++k) {
    Matrix rk = sol.inverse_density.coeff(static_cast<int>(k));
    Vector tap = -(rk.conjugate() * alpha);
    if (tap.cwiseAbs().maxCoeff() > 1e-14) sol.taps[-k] = tap;
  }
  return sol;
}

MinimaxSolution least_favorable_dg(const ClassDGSpec& spec,
                                   const VectorCoeffs& a,
                                   const MissingPattern& pattern,
                                   const Quadrature& quad) {
  if (spec.g_max < 0 || spec.p.size() != static_cast<size_t>(spec.g_max) + 1)
    throw SchemaError("class needs matrices P(0..G)");
  const int dim = static_cast<int>(spec.p[0].rows());
  for (const auto& m : spec.p) check_hermitian(m, "P(g)");
  require_starts_at_zero(pattern);

  TrigMatrixPoly class_poly(dim);
  for (int g = 0; g <= spec.g_max; ++g) class_poly.set_pair(g, spec.p[g]);
  if (grid_min_eigenvalue(class_poly, quad) <= kEigenvalueFloor)
    throw HypothesisViolated(
        "the class polynomial sum P(g) e^{i g lambda} is not positive definite");

  const long bound = pattern.last();
  MinimaxSolution sol{TrigMatrixPoly(dim), DensitySpec::constant(spec.p[0]),
                      CausalFactor{},      {},
                      Vector(),            {},
                      {},                  0.0,
                      {}};

  if (spec.g_max >= bound) {
    sol.inverse_density = class_poly;
    finish_solution(sol, a, pattern, quad, /*taps_from_pipeline=*/true);
    return sol;
  }

  // Split system: multipliers alpha_g on {0..G'} = {0..G} cap the pattern,
  // then the unknown coefficients P(k), k in the pattern past G.
  std::set<long> pattern_set;
  for (long j : pattern.indices()) pattern_set.insert(j);
  std::vector<long> head;
  for (long g = 0; g <= spec.g_max; ++g)
    if (pattern_set.count(g)) head.push_back(g);
  for (size_t i = 0; i < head.size(); ++i)
    if (head[i] != static_cast<long>(i))
      throw UnsupportedPattern(
          "{0..G} must meet the pattern in an initial segment {0..G'}");
  const long g_prime = static_cast<long>(head.size()) - 1;

  auto known = [&](long m) -> Matrix {
    long am = std::labs(m);
    return am <= spec.g_max ? spec.p[am] : Matrix::Zero(dim, dim);
  };

  // Top block system over lags 0..G' with entries B(k,g) = P(|k-g|)^T.
  const long nb = g_prime + 1;
  Matrix top(nb * dim, nb * dim);
  Vector rhs(nb * dim);
  for (long k = 0; k <= g_prime; ++k) {
    rhs.segment(k * dim, dim) = a.at(k);
    for (long g = 0; g <= g_prime; ++g)
      top.block(k * dim, g * dim, dim, dim) = known(k - g).transpose();
  }
  Eigen::FullPivLU<Matrix> lu(top);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw UnderdeterminedSystem("leading multiplier system is rank deficient",
                                static_cast<int>(lu.rank()),
                                static_cast<int>(top.rows()));
  Vector alpha = lu.solve(rhs);
  std::vector<Vector> alphas(nb);
  for (long g = 0; g <= g_prime; ++g) {
    alphas[g] = alpha.segment(g * dim, dim);
    sol.multipliers[g] = alphas[g];
  }

  // Rank-one recovery direction, normalized against alpha_0 so the remaining
  // block rows close exactly; reduces to P(0) (a(0))^{-1} when G' = 0.
  const Vector a0 = a.at(0);
  if (a0.squaredNorm() == 0.0)
    throw ZeroVector("the DG construction needs a(0) != 0");
  Vector z = spec.p[0] * a0.conjugate();
  cd denom = (z.array() * alphas[0].array()).sum();
  if (std::abs(denom) <= 1e-12 * std::max(1.0, z.norm() * alphas[0].norm()))
    throw UnderdeterminedSystem(
        "recovery direction is orthogonal to the leading multiplier",
        static_cast<int>(top.rows()), static_cast<int>(top.rows()));
  Vector w = z / denom;

  std::map<long, Matrix> solved;
  double herm_defect = 0.0;
  for (long k : pattern.indices()) {
    if (k <= g_prime) continue;
    Vector r = a.at(k);
    for (long g = 1; g <= g_prime; ++g) {
      long m = k - g;
      Matrix fm;
      if (m <= spec.g_max) {
        fm = known(m);
      } else if (solved.count(m)) {
        fm = solved[m];
      } else {
        fm = Matrix::Zero(dim, dim);
      }
      r -= fm.transpose() * alphas[g];
    }
    Matrix fk = w * r.transpose();
    solved[k] = fk;
    herm_defect =
        std::max(herm_defect, (fk - fk.adjoint()).cwiseAbs().maxCoeff());
  }
  sol.hypothesis.hermitian_defect = herm_defect;

  for (int g = 0; g <= spec.g_max; ++g)
    sol.inverse_density.set_pair(g, spec.p[g]);
  for (const auto& [k, m] : solved)
    sol.inverse_density.set_pair(static_cast<int>(k), m);

  finish_solution(sol, a, pattern, quad, /*taps_from_pipeline=*/true);
  return sol;
}

std::vector<SaddleEntry> verify_saddle(const MinimaxSolution& solution,
                                       const ClassSpec& cls,
                                       const std::vector<DensitySpec>& candidates,
                                       const Quadrature& quad,
                                       double tol) {
  const auto grid = quad_grid(quad.grid_n);
  const int dim = solution.inverse_density.dim();

  std::vector<SaddleEntry> report;
  for (const auto& f : candidates) {
    if (f.dim() != dim)
      throw DimensionMismatch("candidate dimension does not match solution");

    std::vector<Matrix> fv(grid.size()), winv(grid.size());
    for (size_t t = 0; t < grid.size(); ++t) {
      fv[t] = f.evaluate(grid[t]);
      winv[t] = fv[t].inverse();
    }

    double dev = 0.0;
    if (const auto* d0 = std::get_if<ClassD0Spec>(&cls)) {
      dev = (fourier_coeff(winv, 0) - d0->p).cwiseAbs().maxCoeff();
    } else {
      const auto& dg = std::get<ClassDGSpec>(cls);
      for (int g = 0; g <= dg.g_max; ++g) {
        Matrix cosg =
            0.5 * (fourier_coeff(winv, g) + fourier_coeff(winv, -g));
        dev = std::max(dev, (cosg - dg.p[g]).cwiseAbs().maxCoeff());
      }
    }
    if (dev > 1e-6)
      throw CandidateOutOfClass(
          "candidate violates the class constraint by " + std::to_string(dev),
          dev);

    // Delta(h(f0); f) = (1/2pi) int C0^T (f0)^{-1} f (f0)^{-1} conj(C0).
    double acc = 0.0;
    for (size_t t = 0; t < grid.size(); ++t) {
      Vector c0v = Vector::Zero(dim);
      for (const auto& [j, v] : solution.c0_coeffs)
        c0v += v * unit_phase(j * grid[t]);
      Matrix w0 = solution.inverse_density.eval(grid[t]);
      Vector right = w0 * (fv[t] * (w0 * c0v.conjugate()));
      acc += (c0v.transpose() * right).value().real();
    }
    SaddleEntry entry;
    entry.delta = acc / static_cast<double>(grid.size());
    entry.constraint_dev = dev;
    entry.pass = entry.delta <= solution.delta0 + tol;
    report.push_back(entry);
  }
  return report;
}

}  // namespace pcinterp
