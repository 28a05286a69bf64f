#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pcinterp {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Numeric floors shared across modules. A density counts as positive
// definite on the grid when its smallest eigenvalue stays above
// kEigenvalueFloor and the pointwise condition number stays below
// kConditionCeiling.
inline constexpr double kEigenvalueFloor = 1e-10;
inline constexpr double kConditionCeiling = 1e12;

struct Quadrature {
  int grid_n = 4096;
  // Target residual for iterative constructions (spectral factorization).
  double tol = 1e-9;

  bool valid() const {
    return grid_n >= 8 && (grid_n & (grid_n - 1)) == 0 && tol > 0.0;
  }
};

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct MinimalityViolation : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  double condition;
  SingularSystem(const std::string& msg, double cond)
      : Error(msg), condition(cond) {}
};

struct NotFactorizable : Error {
  using Error::Error;
};

struct ConvergenceFailure : Error {
  double residual;
  ConvergenceFailure(const std::string& msg, double res)
      : Error(msg), residual(res) {}
};

struct NotBlockable : Error {
  using Error::Error;
};

struct HypothesisViolated : Error {
  using Error::Error;
};

struct UnsupportedPattern : Error {
  using Error::Error;
};

struct UnderdeterminedSystem : Error {
  int rank;
  int size;
  UnderdeterminedSystem(const std::string& msg, int rank_, int size_)
      : Error(msg), rank(rank_), size(size_) {}
};

struct ZeroVector : Error {
  using Error::Error;
};

struct MissingObservation : Error {
  long index;
  MissingObservation(const std::string& msg, long idx)
      : Error(msg), index(idx) {}
};

struct CandidateOutOfClass : Error {
  double deviation;
  CandidateOutOfClass(const std::string& msg, double dev)
      : Error(msg), deviation(dev) {}
};

struct UnstableModel : Error {
  using Error::Error;
};

}  // namespace pcinterp
