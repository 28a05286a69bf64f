#pragma once

#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "pcinterp/types.hpp"

namespace pcinterp {

// Hermitian matrix-valued trigonometric polynomial  sum_g P(g) e^{i g lambda}.
// Coefficients are stored sparsely by lag; absent lags are zero.
class TrigMatrixPoly {
 public:
  explicit TrigMatrixPoly(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  int degree() const;

  // Sets P(lag) = m and P(-lag) = m^* in one step.
  void set_pair(int lag, const Matrix& m);
  // Sets a single coefficient without touching the mirror lag.
  void set(int lag, const Matrix& m);

  Matrix coeff(int lag) const;
  const std::map<int, Matrix>& coeffs() const { return coeff_; }

  Matrix eval(double lambda) const;

  // max_g || P(-g) - P(g)^* ||_inf ; zero for a Hermitian-symmetric set.
  double hermitian_defect() const;

 private:
  int dim_;
  std::map<int, Matrix> coeff_;
};

// One-sided factor  Q(e^{i lambda}) = sum_{g=0}^{G} Q(g) e^{-i g lambda}
// with Q Q^* reproducing a positive definite TrigMatrixPoly.
struct CausalFactor {
  int dim = 0;
  std::vector<Matrix> q;  // q[g], g = 0..degree

  int degree() const { return static_cast<int>(q.size()) - 1; }
  Matrix eval(double lambda) const;
  // Exact coefficients of Q(e^{i.}) Q(e^{i.})^*.
  TrigMatrixPoly product() const;
};

// Scalar rational atom  1 / |alpha + beta e^{i lambda}|^2  with |alpha| > |beta|,
// so the single root of alpha + beta z lies outside the unit circle.
struct RationalAtom {
  cd alpha{1.0, 0.0};
  cd beta{0.0, 0.0};

  // 1/|1 - u e^{-i lambda}|^2, |u| < 1.
  static RationalAtom ar1(cd u);
  // 1/|v + w e^{i lambda}|^2 with |v| > |w|.
  static RationalAtom modulus(cd v, cd w);

  double value(double lambda) const;
  // Coefficient of e^{i lag lambda} in the degree-1 polynomial 1/atom.
  cd inverse_coeff(int lag) const;
  void validate() const;
};

enum class RationalStructure {
  // f = diag(atom_1, ..., atom_T)
  kDiagonal,
  // f = L diag(atom_1, ..., atom_T) L^T with L unit lower triangular of ones,
  // i.e. component nu accumulates atoms 1..nu (the nested-sum assembly).
  kCumulative,
};

struct ConstantForm {
  Matrix h;
};

struct ScalarRationalForm {
  RationalStructure structure = RationalStructure::kDiagonal;
  std::vector<RationalAtom> atoms;  // one per component
};

// f(lambda) = Theta(e^{i lambda}) Theta(e^{i lambda})^* with
// Theta = sum_k theta[k] e^{-i k lambda}.
struct MovingAverageForm {
  std::vector<Matrix> theta;  // theta[0..q]
};

struct InverseTrigForm {
  TrigMatrixPoly p;
};

// Samples at lambda_t = -pi + 2 pi t / N, N a power of two >= 8.
struct GridForm {
  std::vector<Matrix> values;
};

class DensitySpec {
 public:
  using Form =
      std::variant<ConstantForm, ScalarRationalForm, MovingAverageForm,
                   InverseTrigForm, GridForm>;

  static DensitySpec constant(const Matrix& h);
  static DensitySpec scalar_rational(RationalStructure structure,
                                     std::vector<RationalAtom> atoms);
  static DensitySpec moving_average(std::vector<Matrix> theta);
  static DensitySpec inverse_trig(TrigMatrixPoly p);
  static DensitySpec grid_samples(std::vector<Matrix> values);

  int dim() const { return dim_; }
  const Form& form() const { return form_; }

  // Hermitian-symmetrized value (M + M^*)/2.
  Matrix evaluate(double lambda) const;

  // Exact trigonometric-polynomial representation of f^{-1} when the form
  // admits one (constant, scalar-rational assemblies, inverse-trig).
  std::optional<TrigMatrixPoly> analytic_inverse() const;

 private:
  DensitySpec(int dim, Form form) : dim_(dim), form_(std::move(form)) {}

  int dim_;
  Form form_;
};

using MatrixFn = std::function<Matrix(double)>;

// Uniform grid lambda_t = -pi + 2 pi t / n.
std::vector<double> quad_grid(int n);

// Samples fn over the grid; throws NumericalError on non-finite values.
std::vector<Matrix> sample_grid(const MatrixFn& fn, int n);

// (1/2pi) int fn e^{-i lag lambda} d lambda by the trapezoid/DFT rule.
Matrix fourier_coeff(const std::vector<Matrix>& samples, int lag);
Matrix fourier_coeff(const MatrixFn& fn, int lag, const Quadrature& quad);

std::map<int, Matrix> fourier_table(const std::vector<Matrix>& samples,
                                    const std::vector<int>& lags);

// All Fourier coefficients of a vector-valued grid function, lag in
// [-n/2, n/2). Uses an FFT; coefficients follow the same convention as
// fourier_coeff.
std::map<int, Vector> fourier_taps(const std::vector<Vector>& samples);

struct MinimalityReport {
  bool ok = false;
  double min_eigenvalue = 0.0;
  double max_condition = 0.0;
};

// Numeric surrogate for integrability of tr[(f+g)^{-1}]: smallest eigenvalue
// of f+g over the grid above the floor, pointwise condition number below the
// ceiling.
MinimalityReport check_minimality(const DensitySpec& f, const DensitySpec* g,
                                  const Quadrature& quad);

// Bauer factorization of a positive definite trigonometric polynomial:
// Cholesky of the banded block-Toeplitz covariance matrix; the trailing block
// row converges to the causal factor. Q(0) comes out lower triangular with
// positive real diagonal.
CausalFactor spectral_factorize(const TrigMatrixPoly& p, double tol = 1e-9,
                                int max_iter = 6);

// Max-norm reconstruction error of q q^* against p over a grid.
double factorization_residual(const TrigMatrixPoly& p, const CausalFactor& q);

}  // namespace pcinterp
