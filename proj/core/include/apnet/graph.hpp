#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace apnet {

// Undirected simple graph over agents 1..n. Node ids are 1-based everywhere in
// the public API; matrix rows and columns use the natural 0-based offset (row
// i-1 belongs to agent i).
class Graph {
 public:
  Graph(int n, const std::vector<std::pair<int, int>>& edges);

  int n() const noexcept { return n_; }

  // Normalized edge list: each pair ordered (min, max), sorted, deduplicated.
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }

  const std::vector<int>& neighbors_of(int id) const;
  int degree_of(int id) const;

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_lists_;
};

Eigen::MatrixXd adjacency_matrix(const Graph& g);
Eigen::MatrixXd degree_matrix(const Graph& g);

// D - A, assembled in integer arithmetic so each row cancels to zero exactly
// after the cast to double.
Eigen::MatrixXd laplacian_matrix(const Graph& g);

// Breadth-first reachability from node 1. This is the authoritative
// connectivity test; the spectral variant in spectral.hpp is a cross-check.
bool is_connected(const Graph& g);

}  // namespace apnet
