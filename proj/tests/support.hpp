#pragma once

// Shared test fixtures: deterministic random instances and independent
// oracles (integral gramian, finite differences, bisection).

#include <unsupported/Eigen/MatrixFunctions>

#include <utility>
#include <vector>

#include "matnet/matnet.hpp"

namespace testsupport {

using matnet::Matrix;
using matnet::MatrixWeightedGraph;
using matnet::Rng;
using matnet::Vector;

inline Matrix random_spd(Rng& rng, int k, double shift = -1.0) {
  if (shift < 0.0) shift = 2.0 + k;
  for (;;) {
    Matrix G(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) G(i, j) = rng.gaussian();
    Matrix W = 0.5 * (G + G.transpose()) + shift * Matrix::Identity(k, k);
    if (matnet::min_eig_sym(W) > 0.05) return W;
  }
}

inline std::vector<std::pair<int, int>> random_connected_edges(Rng& rng, int n, int extra) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::vector<std::pair<int, int>> avail;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const std::pair<int, int> e{i, j};
      if (std::find(edges.begin(), edges.end(), e) == edges.end()) avail.push_back(e);
    }
  for (int t = 0; t < extra && !avail.empty(); ++t) {
    const std::size_t pick = rng.below(avail.size());
    edges.push_back(avail[pick]);
    avail.erase(avail.begin() + static_cast<long>(pick));
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

inline MatrixWeightedGraph random_graph(Rng& rng, int n, int k, int extra_edges,
                                        double eps_lo = 0.1, double eps_hi = 10.0) {
  const auto edges = random_connected_edges(rng, n, extra_edges);
  std::vector<Matrix> weights;
  for (std::size_t e = 0; e < edges.size(); ++e) weights.push_back(random_spd(rng, k));
  Matrix eps(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) eps(i, j) = eps_lo + (eps_hi - eps_lo) * rng.uniform();
  return matnet::build_graph(n, k, edges, std::move(weights), std::move(eps));
}

inline MatrixWeightedGraph random_tree(Rng& rng, int n, int k, double eps_lo = 0.1,
                                       double eps_hi = 10.0) {
  return random_graph(rng, n, k, 0, eps_lo, eps_hi);
}

/// Independent gramian oracle: X = integral of e^{At} QQ e^{A't} dt, by
/// composite Simpson on an initial window followed by exact interval
/// doubling X_{2T} = X_T + E X_T E', E_{2T} = E^2. No Lyapunov solve
/// involved.
inline Matrix gramian_integral_oracle(const Matrix& A, const Matrix& QQ) {
  const int steps = 256;  // Simpson intervals on the initial window (even)
  const double T0 = 1.0 / std::max(1.0, A.norm());
  const double h = T0 / steps;

  const Matrix Eh = (A * h).exp();
  Matrix X = Matrix::Zero(A.rows(), A.cols());
  Matrix Et = Matrix::Identity(A.rows(), A.cols());
  for (int j = 0; j <= steps; ++j) {
    const double w = (j == 0 || j == steps) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    X += w * (Et * QQ * Et.transpose());
    if (j < steps) Et *= Eh;
  }
  X *= h / 3.0;

  Matrix E = (A * T0).exp();
  for (int d = 0; d < 200; ++d) {
    const Matrix inc = E * X * E.transpose();
    X += inc;
    if (inc.norm() <= 1e-14 * (1.0 + X.norm())) break;
    E *= E;
  }
  return X;
}

}  // namespace testsupport
