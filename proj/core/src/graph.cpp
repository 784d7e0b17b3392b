#include "apnet/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "apnet/errors.hpp"

namespace apnet {

Graph::Graph(int n, const std::vector<std::pair<int, int>>& edges) : n_(n) {
  if (n < 1) {
    throw ValidationError("n", "node count must be positive, got " + std::to_string(n));
  }
  edges_.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a == b) {
      throw ValidationError("edges", "self-loop at node " + std::to_string(a));
    }
    if (a < 1 || a > n || b < 1 || b > n) {
      throw ValidationError("edges", "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                         ") has a node id outside [1, " + std::to_string(n) + "]");
    }
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  adjacency_lists_.assign(static_cast<std::size_t>(n) + 1, {});
  for (const auto& [a, b] : edges_) {
    adjacency_lists_[a].push_back(b);
    adjacency_lists_[b].push_back(a);
  }
  for (auto& neighbors : adjacency_lists_) {
    std::sort(neighbors.begin(), neighbors.end());
  }
}

const std::vector<int>& Graph::neighbors_of(int id) const {
  if (id < 1 || id > n_) {
    throw DimensionMismatch("node id " + std::to_string(id) + " outside [1, " +
                            std::to_string(n_) + "]");
  }
  return adjacency_lists_[id];
}

int Graph::degree_of(int id) const { return static_cast<int>(neighbors_of(id).size()); }

Eigen::MatrixXd adjacency_matrix(const Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (const auto& [i, j] : g.edges()) {
    a(i - 1, j - 1) = 1.0;
    a(j - 1, i - 1) = 1.0;
  }
  return a;
}

Eigen::MatrixXd degree_matrix(const Graph& g) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (int id = 1; id <= g.n(); ++id) {
    d(id - 1, id - 1) = g.degree_of(id);
  }
  return d;
}

Eigen::MatrixXd laplacian_matrix(const Graph& g) {
  Eigen::MatrixXi l = Eigen::MatrixXi::Zero(g.n(), g.n());
  for (int id = 1; id <= g.n(); ++id) {
    l(id - 1, id - 1) = g.degree_of(id);
  }
  for (const auto& [i, j] : g.edges()) {
    l(i - 1, j - 1) = -1;
    l(j - 1, i - 1) = -1;
  }
  return l.cast<double>();
}

bool is_connected(const Graph& g) {
  std::vector<char> seen(static_cast<std::size_t>(g.n()) + 1, 0);
  std::queue<int> frontier;
  frontier.push(1);
  seen[1] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : g.neighbors_of(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == g.n();
}

}  // namespace apnet
