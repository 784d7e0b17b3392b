#include "apnet/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <limits>
#include <string>

#include "apnet/errors.hpp"

namespace apnet {

SymmetricEigenDecomposition symmetric_eigendecomposition(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw NotSymmetric("expected a non-empty square matrix, got " + std::to_string(m.rows()) +
                       "x" + std::to_string(m.cols()));
  }
  const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12) {
    throw NotSymmetric("max |m - m^T| = " + std::to_string(asymmetry) + " exceeds 1e-12");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("symmetric eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXd laplacian_pseudoinverse(const Eigen::MatrixXd& L) {
  const Eigen::Index n = L.rows();
  if (L.cols() != n || n == 0) {
    throw NotLaplacian("expected a non-empty square matrix");
  }
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw NotLaplacian("matrix is not symmetric");
  }
  const double scale = 1.0 + L.cwiseAbs().maxCoeff();
  if (L.rowwise().sum().cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw NotLaplacian("row sums are not zero");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && L(i, j) > 1e-12) {
        throw NotLaplacian("positive off-diagonal entry at (" + std::to_string(i + 1) + ", " +
                           std::to_string(j + 1) + ")");
      }
    }
  }

  const SymmetricEigenDecomposition eig = symmetric_eigendecomposition(L);
  const double threshold = 1e-9 * std::max(eig.eigenvalues(n - 1), 0.0);
  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (eig.eigenvalues(k) > threshold) {
      pinv.noalias() +=
          (1.0 / eig.eigenvalues(k)) * (eig.eigenvectors.col(k) * eig.eigenvectors.col(k).transpose());
    }
  }
  return pinv;
}

double algebraic_connectivity(const Graph& g) {
  if (g.n() == 1) {
    return std::numeric_limits<double>::infinity();
  }
  const SymmetricEigenDecomposition eig = symmetric_eigendecomposition(laplacian_matrix(g));
  return eig.eigenvalues(1);
}

bool is_connected_spectral(const Graph& g) { return algebraic_connectivity(g) > 1e-8; }

}  // namespace apnet
