#pragma once

#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "matnet/linalg.hpp"
#include "matnet/tolerances.hpp"

namespace matnet {

/// Undirected connected graph on n nodes whose edges carry k x k symmetric
/// positive-definite weights and whose nodes carry per-substate positive
/// time scales. Immutable after construction; all analyses take it by
/// const reference.
///
/// Indexing is node-major throughout: the (node i, substate j) entry of a
/// stacked kn-vector sits at i*k + j, matching E = Blkdiag(E_1, ..., E_n).
class MatrixWeightedGraph {
 public:
  static MatrixWeightedGraph build(int n, int k,
                                   std::vector<std::pair<int, int>> edges,
                                   std::vector<Matrix> weights,
                                   Matrix timescales,
                                   const Tolerances& tol = default_tolerances()) {
    if (n < 1 || k < 1) throw ConfigInvalid("build_graph: n and k must be positive");
    if (weights.size() != edges.size())
      throw ConfigInvalid("build_graph: one weight per edge required");
    if (timescales.rows() != n || timescales.cols() != k)
      throw ConfigInvalid("build_graph: timescales must be n x k");

    std::set<std::pair<int, int>> seen;
    for (auto& e : edges) {
      if (e.first < 0 || e.first >= n || e.second < 0 || e.second >= n)
        throw ConfigInvalid("build_graph: edge endpoint out of range");
      if (e.first == e.second)
        throw DuplicateEdge("build_graph: self-loop on node " + std::to_string(e.first + 1));
      if (e.first > e.second) std::swap(e.first, e.second);
      if (!seen.insert(e).second)
        throw DuplicateEdge("build_graph: duplicate edge {" + std::to_string(e.first + 1) + "," +
                            std::to_string(e.second + 1) + "}");
    }

    for (std::size_t l = 0; l < weights.size(); ++l) {
      const Matrix& W = weights[l];
      if (W.rows() != k || W.cols() != k)
        throw ConfigInvalid("build_graph: weight " + std::to_string(l + 1) + " is not k x k");
      if (!is_symmetric(W, tol.symmetry))
        throw NonSPDWeight(static_cast<int>(l), "build_graph: weight on edge " +
                                                    std::to_string(l + 1) + " is not symmetric");
      if (min_eig_sym(W) <= 0.0)
        throw NonSPDWeight(static_cast<int>(l), "build_graph: weight on edge " +
                                                    std::to_string(l + 1) +
                                                    " is not positive definite");
    }

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j)
        if (!(timescales(i, j) > 0.0))
          throw NonPositiveScale(i, j, "build_graph: timescale of node " + std::to_string(i + 1) +
                                           ", substate " + std::to_string(j + 1) +
                                           " must be positive");

    if (!connected(n, edges)) throw Disconnected("build_graph: graph is not connected");

    return MatrixWeightedGraph(n, k, std::move(edges), std::move(weights), std::move(timescales));
  }

  int node_count() const { return n_; }
  int substate_dim() const { return k_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  bool is_tree() const { return edge_count() == n_ - 1; }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<Matrix>& weights() const { return weights_; }

  /// Per-node, per-substate time scales as an n x k matrix.
  const Matrix& timescales() const { return timescales_; }

  int degree(int node) const { return degrees_[node]; }
  const std::vector<int>& degrees() const { return degrees_; }

  /// Diagonal of E = Blkdiag(E_1, ..., E_n) as a kn-vector.
  Vector timescale_diagonal() const {
    Vector e(static_cast<Eigen::Index>(n_) * k_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < k_; ++j) e(i * k_ + j) = timescales_(i, j);
    return e;
  }

  /// W: the k|E| x k|E| blockwise-diagonal weight matrix.
  Matrix weight_blkdiag() const { return blkdiag(weights_); }

  /// W^{1/2}, blockwise.
  Matrix weight_blkdiag_sqrt() const {
    std::vector<Matrix> roots;
    roots.reserve(weights_.size());
    for (const Matrix& W : weights_) roots.push_back(sym_sqrt(W));
    return blkdiag(roots);
  }

  /// Same topology, new weights (validated).
  MatrixWeightedGraph with_weights(std::vector<Matrix> weights,
                                   const Tolerances& tol = default_tolerances()) const {
    return build(n_, k_, edges_, std::move(weights), timescales_, tol);
  }

  /// Same topology, new time scales (validated).
  MatrixWeightedGraph with_timescales(Matrix timescales,
                                      const Tolerances& tol = default_tolerances()) const {
    return build(n_, k_, edges_, weights_, std::move(timescales), tol);
  }

 private:
  MatrixWeightedGraph(int n, int k, std::vector<std::pair<int, int>> edges,
                      std::vector<Matrix> weights, Matrix timescales)
      : n_(n), k_(k), edges_(std::move(edges)), weights_(std::move(weights)),
        timescales_(std::move(timescales)), degrees_(n, 0) {
    for (const auto& e : edges_) {
      ++degrees_[e.first];
      ++degrees_[e.second];
    }
  }

  static bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : edges) {
      adj[e.first].push_back(e.second);
      adj[e.second].push_back(e.first);
    }
    std::vector<bool> vis(n, false);
    std::queue<int> q;
    q.push(0);
    vis[0] = true;
    int count = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!vis[v]) {
          vis[v] = true;
          ++count;
          q.push(v);
        }
    }
    return count == n;
  }

  int n_;
  int k_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<Matrix> weights_;
  Matrix timescales_;  // n x k
  std::vector<int> degrees_;
};

inline MatrixWeightedGraph build_graph(int n, int k, std::vector<std::pair<int, int>> edges,
                                       std::vector<Matrix> weights, Matrix timescales,
                                       const Tolerances& tol = default_tolerances()) {
  return MatrixWeightedGraph::build(n, k, std::move(edges), std::move(weights),
                                    std::move(timescales), tol);
}

}  // namespace matnet
