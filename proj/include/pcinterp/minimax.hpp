#pragma once

#include <map>
#include <variant>
#include <vector>

#include "pcinterp/interp.hpp"

namespace pcinterp {

// D0-: densities with (1/2pi) int f^{-1} d lambda = P.
struct ClassD0Spec {
  Matrix p;
};

// DG-: densities with (1/2pi) int f^{-1} cos(g lambda) d lambda = P(g),
// g = 0..G.
struct ClassDGSpec {
  int g_max = 0;
  std::vector<Matrix> p;  // p[0..G]
};

using ClassSpec = std::variant<ClassD0Spec, ClassDGSpec>;

struct HypothesisReport {
  bool positive_definite = false;
  double min_eigenvalue = 0.0;
  // Deviation of the recovered coefficients from Hermitian symmetry of the
  // individual P(g); the paired polynomial is Hermitian by construction.
  double hermitian_defect = 0.0;
};

struct MinimaxSolution {
  TrigMatrixPoly inverse_density;     // sum R(k) e^{i k lambda}
  DensitySpec f0;                     // its inverse, the least favorable density
  CausalFactor factor;                // AR representation coefficients Q
  std::map<long, Vector> taps;        // minimax characteristic h0
  Vector c0;
  VectorCoeffs c0_coeffs;
  std::map<long, Vector> multipliers; // Lagrange multipliers, keyed by lag
  double delta0 = 0.0;
  HypothesisReport hypothesis;
};

// Minimum-norm vector v with v^T a0 = 1 (the Moore-Penrose choice
// conj(a0)/||a0||^2).
Vector pseudo_inverse_lead(const Vector& a0);

MinimaxSolution least_favorable_d0(const ClassD0Spec& spec,
                                   const VectorCoeffs& a,
                                   const MissingPattern& pattern,
                                   const Quadrature& quad,
                                   const Vector* lead_override = nullptr);

MinimaxSolution least_favorable_dg(const ClassDGSpec& spec,
                                   const VectorCoeffs& a,
                                   const MissingPattern& pattern,
                                   const Quadrature& quad);

struct SaddleEntry {
  double delta = 0.0;          // Delta(h0; f) for the candidate
  double constraint_dev = 0.0; // measured class-constraint deviation
  bool pass = false;           // delta <= delta0 + tol
};

// Evaluates Delta(h(f0); f) for each in-class candidate by quadrature of the
// extremal-functional integrand and checks it against delta0. Candidates
// violating the class constraint beyond 1e-6 raise CandidateOutOfClass.
std::vector<SaddleEntry> verify_saddle(const MinimaxSolution& solution,
                                       const ClassSpec& cls,
                                       const std::vector<DensitySpec>& candidates,
                                       const Quadrature& quad,
                                       double tol = 1e-6);

}  // namespace pcinterp
