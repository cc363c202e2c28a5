#pragma once

#include <algorithm>
#include <queue>
#include <vector>

#include "matnet/graph.hpp"
#include "matnet/linalg.hpp"

namespace matnet {

/// Signed incidence matrix, spanning-tree split and cut-space basis of a
/// connected graph, together with the Kronecker block expansions (suffix _x,
/// each M_x = M (x) I_k).
///
/// Sign convention: for edge {i, j} with i < j, node j gets +1 and node i
/// gets -1. The spanning tree grows from node 0 taking edges in input
/// order, so the decomposition is reproducible. R is stored in the original edge order, hence D = D_tau * R
/// holds without any column permutation.
struct IncidenceDecomposition {
  Matrix D;      // n x m
  Matrix D_tau;  // n x (n-1)
  Matrix D_c;    // n x (m-n+1)
  Matrix T_tau_c;  // (n-1) x (m-n+1), solves D_tau T = D_c
  Matrix R;        // (n-1) x m cut-space basis

  std::vector<int> tree_edges;    // ascending indices into the edge list
  std::vector<int> cotree_edges;  // ascending

  Matrix D_x, D_tau_x, D_c_x, T_tau_c_x, R_x;
};

namespace detail {

// Grow from node 0, scanning the edge list in input order and taking every
// edge that connects the visited set to a new node; repeat until spanning.
// Deterministic, and on the triangle {1,2},{2,3},{1,3} it picks the first
// two edges.
inline std::vector<int> input_order_spanning_tree(const MatrixWeightedGraph& g) {
  const int n = g.node_count();
  const auto& edges = g.edges();
  std::vector<bool> visited(n, false);
  std::vector<bool> used(edges.size(), false);
  visited[0] = true;
  std::vector<int> tree;
  bool grew = true;
  while (static_cast<int>(tree.size()) < n - 1 && grew) {
    grew = false;
    for (std::size_t l = 0; l < edges.size(); ++l) {
      if (used[l]) continue;
      const auto& [a, b] = edges[l];
      if (visited[a] == visited[b]) continue;
      visited[a] = visited[b] = true;
      used[l] = true;
      tree.push_back(static_cast<int>(l));
      grew = true;
    }
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

}  // namespace detail

inline IncidenceDecomposition incidence(const MatrixWeightedGraph& g,
                                        const Tolerances& tol = default_tolerances()) {
  const int n = g.node_count();
  const int m = g.edge_count();
  const int k = g.substate_dim();

  IncidenceDecomposition dec;
  dec.D = Matrix::Zero(n, m);
  for (int l = 0; l < m; ++l) {
    const auto& [i, j] = g.edges()[l];  // i < j after normalization
    dec.D(i, l) = -1.0;
    dec.D(j, l) = +1.0;
  }

  dec.tree_edges = detail::input_order_spanning_tree(g);
  std::vector<bool> in_tree(m, false);
  for (int l : dec.tree_edges) in_tree[l] = true;
  for (int l = 0; l < m; ++l)
    if (!in_tree[l]) dec.cotree_edges.push_back(l);

  const int mt = static_cast<int>(dec.tree_edges.size());
  const int mc = m - mt;
  dec.D_tau.resize(n, mt);
  for (int t = 0; t < mt; ++t) dec.D_tau.col(t) = dec.D.col(dec.tree_edges[t]);
  dec.D_c.resize(n, mc);
  for (int c = 0; c < mc; ++c) dec.D_c.col(c) = dec.D.col(dec.cotree_edges[c]);

  // T_tau_c = (D_tau' D_tau)^{-1} D_tau' D_c; the tree gram is SPD.
  const Matrix gram = dec.D_tau.transpose() * dec.D_tau;
  dec.T_tau_c = gram.llt().solve(dec.D_tau.transpose() * dec.D_c);

  dec.R = Matrix::Zero(mt, m);
  for (int t = 0; t < mt; ++t) dec.R(t, dec.tree_edges[t]) = 1.0;
  for (int c = 0; c < mc; ++c) dec.R.col(dec.cotree_edges[c]) = dec.T_tau_c.col(c);

  if ((dec.D - dec.D_tau * dec.R).cwiseAbs().maxCoeff() > tol.exact_identity)
    throw Error("incidence: D != D_tau R beyond tolerance");

  dec.D_x = kron_identity(dec.D, k);
  dec.D_tau_x = kron_identity(dec.D_tau, k);
  dec.D_c_x = kron_identity(dec.D_c, k);
  dec.T_tau_c_x = kron_identity(dec.T_tau_c, k);
  dec.R_x = kron_identity(dec.R, k);
  return dec;
}

/// Weighted graph Laplacian L_w = D W D' (block expanded), kn x kn.
inline Matrix weighted_laplacian(const MatrixWeightedGraph& g) {
  const int n = g.node_count();
  const int k = g.substate_dim();
  Matrix L = Matrix::Zero(static_cast<Eigen::Index>(n) * k, static_cast<Eigen::Index>(n) * k);
  for (int l = 0; l < g.edge_count(); ++l) {
    const auto& [i, j] = g.edges()[l];
    const Matrix& W = g.weights()[l];
    L.block(i * k, i * k, k, k) += W;
    L.block(j * k, j * k, k, k) += W;
    L.block(i * k, j * k, k, k) -= W;
    L.block(j * k, i * k, k, k) -= W;
  }
  return L;
}

/// Scaled edge Laplacian of the spanning tree, L_es = D_tau' E^{-1} D_tau.
/// Symmetric positive definite on connected graphs with positive scales.
inline Matrix scaled_edge_laplacian(const MatrixWeightedGraph& g,
                                    const IncidenceDecomposition& dec) {
  const Vector e_inv = g.timescale_diagonal().cwiseInverse();
  return dec.D_tau_x.transpose() * e_inv.asDiagonal() * dec.D_tau_x;
}

}  // namespace matnet
