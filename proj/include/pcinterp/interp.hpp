#pragma once

#include <map>
#include <vector>

#include "pcinterp/blocking.hpp"
#include "pcinterp/spectral.hpp"
#include "pcinterp/types.hpp"

namespace pcinterp {

// B_s, D_s, R_s restricted to the missing set. Block (k, j) of B is the
// lag-(k-j) Fourier coefficient of (f+g)^{-1}, transposed; D and R use
// f(f+g)^{-1} and f(f+g)^{-1}g. In the noiseless mode D is the identity and
// R is zero, exactly.
struct BlockMatrices {
  Matrix b;
  Matrix d;
  Matrix r;
  std::vector<long> slots;  // missing indices, ascending
  int dim = 0;
  bool noiseless = true;
};

struct SolutionDiagnostics {
  double condition = 0.0;
  std::map<long, double> orthogonality;  // j in S -> residual norm
};

struct InterpSolution {
  Vector c;                    // stacked coefficient vector c_s
  VectorCoeffs c_coeffs;       // the same, keyed by missing index
  std::map<long, Vector> taps; // time-domain filter h_j
  double delta = 0.0;          // mean square error
  SolutionDiagnostics diagnostics;
};

BlockMatrices assemble_block_matrices(const DensitySpec& f,
                                      const DensitySpec* g,
                                      const MissingPattern& pattern,
                                      const Quadrature& quad);

// Flattens coefficients on the pattern into the stacked vector a_s
// (component-major within each index). The support must equal the pattern.
Vector stack_functional(const VectorCoeffs& a, const MissingPattern& pattern,
                        int dim);
VectorCoeffs scatter_vector(const Vector& v, const MissingPattern& pattern,
                            int dim);

// c_s from B_s c_s = D_s a_s via Hermitian factorization with one step of
// iterative refinement. Throws SingularSystem past the condition ceiling.
Vector solve_coefficients(const BlockMatrices& bm, const Vector& a_s,
                          double* condition_out = nullptr);

// Time-domain taps h_j of the spectral characteristic. Exact closed form when
// the noiseless analytic inverse is available, otherwise FFT extraction with
// an energy-based truncation window.
std::map<long, Vector> spectral_characteristic(const DensitySpec& f,
                                               const DensitySpec* g,
                                               const MissingPattern& pattern,
                                               const VectorCoeffs& a,
                                               const VectorCoeffs& c,
                                               const Quadrature& quad);

// Delta = <a, R a> + <c, B c>; reduces to <c, a> when noiseless.
double mean_square_error(const Vector& a_s, const Vector& c_s,
                         const BlockMatrices& bm);

// sum_j h_j^T x(j) over the filter support; every tap position must be
// observed.
cd estimate_functional(const std::map<long, Vector>& taps,
                       const std::map<long, Vector>& observations,
                       const MissingPattern& pattern);

// Residuals ||(1/2pi) int h e^{-i j lambda}|| for j in S by direct quadrature
// of the evaluated characteristic (independent of the tap extraction).
std::map<long, double> verify_orthogonality(const DensitySpec& f,
                                            const DensitySpec* g,
                                            const MissingPattern& pattern,
                                            const VectorCoeffs& a,
                                            const VectorCoeffs& c,
                                            const Quadrature& quad);

// The quadratic error functional for an arbitrary finite filter:
// (1/2pi) int (A - H)^T f conj(A - H) + (1/2pi) int H^T g conj(H).
double error_functional(const DensitySpec& f, const DensitySpec* g,
                        const VectorCoeffs& a,
                        const std::map<long, Vector>& taps,
                        const Quadrature& quad);

// Full pipeline: assemble, solve, taps, error, diagnostics.
InterpSolution interpolate(const DensitySpec& f, const DensitySpec* g,
                           const MissingPattern& pattern,
                           const VectorCoeffs& a, const Quadrature& quad);

}  // namespace pcinterp
