#include "pcinterp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include <fftw3.h>

namespace pcinterp {

namespace {

Matrix zero(int dim) { return Matrix::Zero(dim, dim); }

cd unit_phase(double x) { return cd(std::cos(x), std::sin(x)); }

bool finite(const Matrix& m) {
  return m.allFinite();
}

}  // namespace

int TrigMatrixPoly::degree() const {
  int g = 0;
  for (const auto& [lag, m] : coeff_) g = std::max(g, std::abs(lag));
  return g;
}

void TrigMatrixPoly::set_pair(int lag, const Matrix& m) {
  if (m.rows() != dim_ || m.cols() != dim_)
    throw DimensionMismatch("trig polynomial coefficient has wrong shape");
  coeff_[lag] = m;
  coeff_[-lag] = m.adjoint();
}

void TrigMatrixPoly::set(int lag, const Matrix& m) {
  if (m.rows() != dim_ || m.cols() != dim_)
    throw DimensionMismatch("trig polynomial coefficient has wrong shape");
  coeff_[lag] = m;
}

Matrix TrigMatrixPoly::coeff(int lag) const {
  auto it = coeff_.find(lag);
  return it == coeff_.end() ? zero(dim_) : it->second;
}

Matrix TrigMatrixPoly::eval(double lambda) const {
  Matrix out = zero(dim_);
  for (const auto& [lag, m] : coeff_) out += m * unit_phase(lag * lambda);
  return out;
}

double TrigMatrixPoly::hermitian_defect() const {
  double worst = 0.0;
  for (const auto& [lag, m] : coeff_) {
    Matrix mirror = coeff(-lag);
    worst = std::max(worst, (mirror - m.adjoint()).cwiseAbs().maxCoeff());
  }
  return worst;
}

Matrix CausalFactor::eval(double lambda) const {
  Matrix out = zero(dim);
  for (int g = 0; g < static_cast<int>(q.size()); ++g)
    out += q[g] * unit_phase(-g * lambda);
  return out;
}

TrigMatrixPoly CausalFactor::product() const {
  // Q Qstar = sum_{g,l} Q(g) Q(l)^* e^{-i(g-l) lambda}: coefficient of
  // e^{i m lambda} is sum_l Q(l-m) Q(l)^*.
  TrigMatrixPoly out(dim);
  const int deg = degree();
  for (int m = -deg; m <= deg; ++m) {
    Matrix acc = zero(dim);
    for (int l = 0; l <= deg; ++l) {
      int k = l - m;
      if (k < 0 || k > deg) continue;
      acc += q[k] * q[l].adjoint();
    }
    out.set(m, acc);
  }
  return out;
}

RationalAtom RationalAtom::ar1(cd u) {
  RationalAtom a;
  a.alpha = cd(1.0, 0.0);
  a.beta = -std::conj(u);
  a.validate();
  return a;
}

RationalAtom RationalAtom::modulus(cd v, cd w) {
  RationalAtom a;
  a.alpha = v;
  a.beta = w;
  a.validate();
  return a;
}

void RationalAtom::validate() const {
  if (!(std::abs(alpha) > std::abs(beta)))
    throw SchemaError("rational atom root must lie outside the unit circle");
}

double RationalAtom::value(double lambda) const {
  cd denom = alpha + beta * unit_phase(lambda);
  return 1.0 / std::norm(denom);
}

cd RationalAtom::inverse_coeff(int lag) const {
  // |alpha + beta e^{i lambda}|^2
  //   = (|alpha|^2 + |beta|^2) + conj(alpha) beta e^{i lambda}
  //     + alpha conj(beta) e^{-i lambda}
  switch (lag) {
    case 0:
      return cd(std::norm(alpha) + std::norm(beta), 0.0);
    case 1:
      return std::conj(alpha) * beta;
    case -1:
      return alpha * std::conj(beta);
    default:
      return cd(0.0, 0.0);
  }
}

DensitySpec DensitySpec::constant(const Matrix& h) {
  if (h.rows() != h.cols() || h.rows() < 1)
    throw SchemaError("constant density must be square");
  return DensitySpec(static_cast<int>(h.rows()), ConstantForm{h});
}

DensitySpec DensitySpec::scalar_rational(RationalStructure structure,
                                         std::vector<RationalAtom> atoms) {
  if (atoms.empty()) throw SchemaError("scalar rational assembly needs atoms");
  for (const auto& a : atoms) a.validate();
  int dim = static_cast<int>(atoms.size());
  return DensitySpec(dim, ScalarRationalForm{structure, std::move(atoms)});
}

DensitySpec DensitySpec::moving_average(std::vector<Matrix> theta) {
  if (theta.empty()) throw SchemaError("moving average needs theta(0)");
  int dim = static_cast<int>(theta[0].rows());
  for (const auto& t : theta)
    if (t.rows() != dim || t.cols() != dim)
      throw DimensionMismatch("moving average coefficients must be T x T");
  return DensitySpec(dim, MovingAverageForm{std::move(theta)});
}

DensitySpec DensitySpec::inverse_trig(TrigMatrixPoly p) {
  if (p.hermitian_defect() > 1e-12)
    throw SchemaError("inverse-trig density needs P(-g) = P(g)^*");
  int dim = p.dim();
  return DensitySpec(dim, InverseTrigForm{std::move(p)});
}

DensitySpec DensitySpec::grid_samples(std::vector<Matrix> values) {
  size_t n = values.size();
  if (n < 8 || (n & (n - 1)) != 0)
    throw SchemaError("grid form needs a power-of-two sample count >= 8");
  int dim = static_cast<int>(values[0].rows());
  for (const auto& v : values)
    if (v.rows() != dim || v.cols() != dim)
      throw DimensionMismatch("grid samples must be T x T");
  return DensitySpec(dim, GridForm{std::move(values)});
}

Matrix DensitySpec::evaluate(double lambda) const {
  Matrix m(dim_, dim_);
  if (const auto* c = std::get_if<ConstantForm>(&form_)) {
    m = c->h;
  } else if (const auto* s = std::get_if<ScalarRationalForm>(&form_)) {
    Matrix d = zero(dim_);
    for (int nu = 0; nu < dim_; ++nu) d(nu, nu) = s->atoms[nu].value(lambda);
    if (s->structure == RationalStructure::kDiagonal) {
      m = d;
    } else {
      Matrix l = Matrix::Zero(dim_, dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j <= i; ++j) l(i, j) = 1.0;
      m = l * d * l.transpose();
    }
  } else if (const auto* ma = std::get_if<MovingAverageForm>(&form_)) {
    Matrix t = zero(dim_);
    for (int k = 0; k < static_cast<int>(ma->theta.size()); ++k)
      t += ma->theta[k] * unit_phase(-k * lambda);
    m = t * t.adjoint();
  } else if (const auto* it = std::get_if<InverseTrigForm>(&form_)) {
    Matrix p = it->p.eval(lambda);
    m = p.inverse();
  } else {
    const auto& g = std::get<GridForm>(form_);
    int n = static_cast<int>(g.values.size());
    double pos = (lambda + kPi) * n / (2.0 * kPi);
    long idx = std::lround(pos);
    double residue = std::abs(pos - static_cast<double>(idx));
    if (residue > 1e-9 * n)
      throw NumericalError("grid density evaluated off-grid");
    idx = ((idx % n) + n) % n;
    m = g.values[idx];
  }
  return 0.5 * (m + m.adjoint().eval());
}

std::optional<TrigMatrixPoly> DensitySpec::analytic_inverse() const {
  if (const auto* c = std::get_if<ConstantForm>(&form_)) {
    Eigen::FullPivLU<Matrix> lu(0.5 * (c->h + c->h.adjoint().eval()));
    if (!lu.isInvertible()) return std::nullopt;
    TrigMatrixPoly p(dim_);
    p.set(0, lu.inverse());
    return p;
  }
  if (const auto* s = std::get_if<ScalarRationalForm>(&form_)) {
    // inv(f) lag-m coefficient as a diagonal matrix of atom inverses,
    // conjugated by L^{-T} .. L^{-1} in the cumulative case.
    Matrix linv = Matrix::Identity(dim_, dim_);
    if (s->structure == RationalStructure::kCumulative) {
      for (int i = 1; i < dim_; ++i) linv(i, i - 1) = -1.0;
    }
    TrigMatrixPoly p(dim_);
    for (int m = -1; m <= 1; ++m) {
      Matrix d = zero(dim_);
      for (int nu = 0; nu < dim_; ++nu)
        d(nu, nu) = s->atoms[nu].inverse_coeff(m);
      p.set(m, linv.transpose() * d * linv);
    }
    return p;
  }
  if (const auto* it = std::get_if<InverseTrigForm>(&form_)) return it->p;
  return std::nullopt;
}

std::vector<double> quad_grid(int n) {
  std::vector<double> g(n);
  for (int t = 0; t < n; ++t) g[t] = -kPi + 2.0 * kPi * t / n;
  return g;
}

std::vector<Matrix> sample_grid(const MatrixFn& fn, int n) {
  auto grid = quad_grid(n);
  std::vector<Matrix> out;
  out.reserve(n);
  for (double lambda : grid) {
    Matrix m = fn(lambda);
    if (!finite(m))
      throw NumericalError("non-finite density value at lambda = " +
                           std::to_string(lambda));
    out.push_back(std::move(m));
  }
  return out;
}

Matrix fourier_coeff(const std::vector<Matrix>& samples, int lag) {
  int n = static_cast<int>(samples.size());
  Matrix acc = Matrix::Zero(samples[0].rows(), samples[0].cols());
  for (int t = 0; t < n; ++t) {
    double lambda = -kPi + 2.0 * kPi * t / n;
    acc += samples[t] * unit_phase(-lag * lambda);
  }
  return acc / static_cast<double>(n);
}

Matrix fourier_coeff(const MatrixFn& fn, int lag, const Quadrature& quad) {
  if (!quad.valid()) throw SchemaError("quadrature grid must be a power of two >= 8");
  return fourier_coeff(sample_grid(fn, quad.grid_n), lag);
}

std::map<int, Matrix> fourier_table(const std::vector<Matrix>& samples,
                                    const std::vector<int>& lags) {
  std::map<int, Matrix> out;
  for (int lag : lags)
    if (!out.count(lag)) out[lag] = fourier_coeff(samples, lag);
  return out;
}

namespace {
// The FFTW planner is global state; executing a plan is thread-safe but
// creating and destroying plans is not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::map<int, Vector> fourier_taps(const std::vector<Vector>& samples) {
  int n = static_cast<int>(samples.size());
  int dim = static_cast<int>(samples[0].size());
  std::vector<cd> in(n), out(n);
  Eigen::MatrixXcd spectra(dim, n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (int c = 0; c < dim; ++c) {
    for (int t = 0; t < n; ++t) in[t] = samples[t](c);
    fftw_execute(plan);
    for (int m = 0; m < n; ++m) spectra(c, m) = out[m];
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  // lambda_t = -pi + 2 pi t / n, so the lag-m coefficient is
  // (-1)^m / n * DFT_m with the DFT index taken mod n.
  std::map<int, Vector> taps;
  for (int m = -n / 2; m < n / 2; ++m) {
    int idx = ((m % n) + n) % n;
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    taps[m] = sign / n * spectra.col(idx);
  }
  return taps;
}

MinimalityReport check_minimality(const DensitySpec& f, const DensitySpec* g,
                                  const Quadrature& quad) {
  if (g && g->dim() != f.dim())
    throw DimensionMismatch("signal and noise densities disagree in dimension");
  if (!quad.valid()) throw SchemaError("quadrature grid must be a power of two >= 8");
  MinimalityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  rep.max_condition = 0.0;
  for (double lambda : quad_grid(quad.grid_n)) {
    Matrix m = f.evaluate(lambda);
    if (g) m += g->evaluate(lambda);
    if (!m.allFinite()) {
      rep.min_eigenvalue = -std::numeric_limits<double>::infinity();
      rep.max_condition = std::numeric_limits<double>::infinity();
      rep.ok = false;
      return rep;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    double lo = eig.eigenvalues().minCoeff();
    double hi = eig.eigenvalues().maxCoeff();
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, lo);
    double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    rep.max_condition = std::max(rep.max_condition, cond);
  }
  rep.ok = rep.min_eigenvalue > kEigenvalueFloor &&
           rep.max_condition < kConditionCeiling;
  return rep;
}

double factorization_residual(const TrigMatrixPoly& p, const CausalFactor& q) {
  int n = 512;
  while (n < 8 * (p.degree() + 1)) n *= 2;
  double worst = 0.0;
  for (double lambda : quad_grid(n)) {
    Matrix qv = q.eval(lambda);
    Matrix diff = qv * qv.adjoint() - p.eval(lambda);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace pcinterp
