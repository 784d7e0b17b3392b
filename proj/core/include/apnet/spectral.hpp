#pragma once

#include <Eigen/Dense>

#include "apnet/graph.hpp"

namespace apnet {

struct SymmetricEigenDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, same order
};

// Throws NotSymmetric when max |m - m^T| exceeds 1e-12.
SymmetricEigenDecomposition symmetric_eigendecomposition(const Eigen::MatrixXd& m);

// Moore-Penrose pseudoinverse of a graph Laplacian through its
// eigendecomposition, inverting only eigenvalues above 1e-9 * lambda_max (a
// relative threshold, so scaled graphs behave identically). Throws
// NotLaplacian unless the argument is symmetric with zero row sums and
// non-positive off-diagonal entries.
Eigen::MatrixXd laplacian_pseudoinverse(const Eigen::MatrixXd& L);

// Second-smallest Laplacian eigenvalue. A single node has no second eigenvalue
// and reports +infinity, which keeps the "connected iff positive" reading.
double algebraic_connectivity(const Graph& g);

// lambda_2 > 1e-8. Cross-check only; is_connected is authoritative.
bool is_connected_spectral(const Graph& g);

}  // namespace apnet
