#include <algorithm>
#include <cmath>
#include <vector>

#include "pcinterp/spectral.hpp"

namespace pcinterp {

namespace {

// One banded block-Cholesky sweep of the order-`blocks` Toeplitz matrix
// C[i,j] = p.coeff(j-i); returns the trailing block row as the factor
// candidate Q(g) = L[last, last-g].
std::vector<Matrix> bauer_sweep(const TrigMatrixPoly& p, int blocks) {
  const int dim = p.dim();
  const int band = p.degree();
  const int width = band + 1;

  // Ring buffer of the last `width` block rows; row i stores L[i, i-o]
  // at offset o = 0..band.
  std::vector<std::vector<Matrix>> rows(
      width, std::vector<Matrix>(width, Matrix::Zero(dim, dim)));
  std::vector<Matrix> diag_inv_adj(width, Matrix::Zero(dim, dim));

  for (int i = 0; i < blocks; ++i) {
    auto& row = rows[i % width];
    for (int j = std::max(0, i - band); j <= i; ++j) {
      Matrix s = p.coeff(j - i);
      const auto& rj = rows[j % width];
      for (int k = std::max(0, i - band); k < j; ++k) {
        // both L[i,k] and L[j,k] live in the band
        s -= row[i - k] * rj[j - k].adjoint();
      }
      if (j < i) {
        row[i - j] = s * diag_inv_adj[j % width];
      } else {
        Eigen::LLT<Matrix> llt(s);
        if (llt.info() != Eigen::Success)
          throw NotFactorizable(
              "block Cholesky broke down; polynomial is not positive definite "
              "enough to factor");
        row[0] = llt.matrixL();
        diag_inv_adj[i % width] = Matrix(row[0].adjoint()).inverse();
      }
    }
  }

  const auto& last = rows[(blocks - 1) % width];
  std::vector<Matrix> q(width);
  for (int g = 0; g < width; ++g) q[g] = last[g];
  return q;
}

}  // namespace

CausalFactor spectral_factorize(const TrigMatrixPoly& p, double tol,
                                int max_iter) {
  if (p.dim() < 1) throw SchemaError("cannot factor an empty polynomial");
  if (p.hermitian_defect() > 1e-10)
    throw NotFactorizable("polynomial is not Hermitian-symmetric");

  int n = 512;
  while (n < 8 * (p.degree() + 1)) n *= 2;
  double min_eig = std::numeric_limits<double>::infinity();
  for (double lambda : quad_grid(n)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p.eval(lambda),
                                              Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
  }
  if (min_eig <= kEigenvalueFloor)
    throw NotFactorizable("polynomial is not positive definite on the grid; "
                          "min eigenvalue " +
                          std::to_string(min_eig));

  CausalFactor factor;
  factor.dim = p.dim();
  double residual = std::numeric_limits<double>::infinity();
  int blocks = 256;
  for (int iter = 0; iter <= max_iter; ++iter, blocks *= 2) {
    factor.q = bauer_sweep(p, blocks);
    residual = factorization_residual(p, factor);
    if (residual <= tol) return factor;
  }
  throw ConvergenceFailure(
      "Bauer iteration failed to reach tolerance; residual " +
          std::to_string(residual),
      residual);
}

}  // namespace pcinterp
