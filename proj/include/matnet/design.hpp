#pragma once

#include <cmath>
#include <vector>

#include "matnet/incidence.hpp"

namespace matnet {

/// Matrix interval constraint W_min <= W_e <= W_max (Loewner order).
struct WeightBox {
  Matrix W_min;
  Matrix W_max;

  static WeightBox validated(Matrix W_min, Matrix W_max,
                             const Tolerances& tol = default_tolerances()) {
    if (W_min.rows() != W_min.cols() || W_max.rows() != W_max.cols() ||
        W_min.rows() != W_max.rows())
      throw ConfigInvalid("WeightBox: bounds must be square of equal size");
    if (!is_spd(W_min, tol.symmetry) || !is_spd(W_max, tol.symmetry))
      throw ConfigInvalid("WeightBox: bounds must be SPD");
    if (min_eig_sym(W_max - W_min) < -tol.psd_order)
      throw ConfigInvalid("WeightBox: W_max - W_min must be PSD");
    return WeightBox{std::move(W_min), std::move(W_max)};
  }

  bool contains(const Matrix& W, double slack = 0.0) const {
    return min_eig_sym(W - W_min) >= -slack && min_eig_sym(W_max - W) >= -slack;
  }
};

/// Box and penalty for the time-scale assignment problem.
struct TimescaleBox {
  double eps_min;
  double eps_max;
  double h;  // penalty weight
  int r;     // penalty exponent, positive integer

  static TimescaleBox validated(double eps_min, double eps_max, double h, int r) {
    if (!(eps_min > 0.0) || !(eps_max >= eps_min))
      throw ConfigInvalid("TimescaleBox: need 0 < eps_min <= eps_max");
    if (!(h > 0.0) || r < 1) throw ConfigInvalid("TimescaleBox: need h > 0 and r >= 1");
    return TimescaleBox{eps_min, eps_max, h, r};
  }
};

/// Record of a projected-gradient run. iterates[0] holds the initial
/// weights; costs and box_active are aligned with iterates.
struct DescentReport {
  std::vector<std::vector<Matrix>> iterates;
  std::vector<double> costs;
  std::vector<bool> box_active;  // any edge touching the box at this iterate
  bool converged = false;
  int iterations = 0;
};

namespace detail {

// Cut gram R W R' with a positive-definiteness check.
inline Eigen::LLT<Matrix> cut_gram_llt(const IncidenceDecomposition& dec, const Matrix& W_blk) {
  const Matrix G = symmetrize(dec.R_x * W_blk * dec.R_x.transpose());
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success)
    throw SingularCutGram("cut gram R W R' is numerically singular");
  return llt;
}

inline Matrix q_matrix(const IncidenceDecomposition& dec, const Matrix& W_blk) {
  const auto llt = cut_gram_llt(dec, W_blk);
  return dec.R_x.transpose() * llt.solve(dec.R_x);
}

}  // namespace detail

/// P1 objective: tr(R' (R W R')^{-1} R) + (h/2) sum_e tr(W_e' W_e).
/// The regularizer is the one consistent with the stated gradient.
inline double p1_cost(const MatrixWeightedGraph& g, double h,
                      const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix Q = detail::q_matrix(dec, g.weight_blkdiag());
  double reg = 0.0;
  for (const Matrix& W : g.weights()) reg += (W.transpose() * W).trace();
  return Q.trace() + 0.5 * h * reg;
}

/// Gradient of the P1 objective with respect to the weight on one edge:
/// -deblk_e[Q' Q] + h W_e with Q = R' (R W R')^{-1} R. Symmetrized after
/// block extraction to guard against floating-point asymmetry.
inline Matrix p1_gradient(const MatrixWeightedGraph& g, int edge, double h,
                          const Tolerances& tol = default_tolerances()) {
  if (edge < 0 || edge >= g.edge_count()) throw ConfigInvalid("p1_gradient: edge out of range");
  const int k = g.substate_dim();
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix Q = detail::q_matrix(dec, g.weight_blkdiag());
  const Matrix QQ = Q * Q;  // Q is symmetric
  const Matrix blk = QQ.block(static_cast<Eigen::Index>(edge) * k,
                              static_cast<Eigen::Index>(edge) * k, k, k);
  return symmetrize(-blk + h * g.weights()[edge]);
}

namespace detail {

inline Matrix clip_psd_above(const Matrix& X, const Matrix& floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(X - floor));
  const Vector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose() + floor;
}

inline Matrix clip_psd_below(const Matrix& X, const Matrix& ceil) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(ceil - X));
  const Vector lam = es.eigenvalues().cwiseMax(0.0);
  return ceil - es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Dykstra alternating projection of a symmetric matrix onto the matrix
/// interval {X : W_min <= X <= W_max}, each half-projection by eigenvalue
/// clipping of the shifted matrix.
inline Matrix project_weight_box(const Matrix& W, const WeightBox& box,
                                 const Tolerances& tol = default_tolerances()) {
  Matrix X = symmetrize(W);
  Matrix P = Matrix::Zero(X.rows(), X.cols());
  Matrix Q = Matrix::Zero(X.rows(), X.cols());
  for (int sweep = 0; sweep < tol.dykstra_max_sweeps; ++sweep) {
    const Matrix Y = detail::clip_psd_above(X + P, box.W_min);
    P = X + P - Y;
    const Matrix Xn = detail::clip_psd_below(Y + Q, box.W_max);
    Q = Y + Q - Xn;
    const double step = (Xn - X).norm();
    X = Xn;
    if (step < tol.dykstra_fixpoint) break;
  }
  if (!box.contains(X, tol.psd_order))
    throw ProjectionDiverged("project_weight_box: result violates the box");
  return X;
}

/// Projected gradient descent on the edge weights with the diminishing step
/// 1/(h sqrt(t)), t = 1, 2, ... Stops when the relative cost change drops
/// below tol_rel or after max_iter iterations.
inline DescentReport optimize_weights(const MatrixWeightedGraph& g, const WeightBox& box,
                                      double h, int max_iter = -1, double tol_rel = -1.0,
                                      const Tolerances& tol = default_tolerances()) {
  if (!(h > 0.0)) throw ConfigInvalid("optimize_weights: h must be positive");
  if (max_iter < 0) max_iter = tol.descent_max_iter;
  if (tol_rel < 0.0) tol_rel = tol.descent_tol;

  const int k = g.substate_dim();
  const int m = g.edge_count();
  const IncidenceDecomposition dec = incidence(g, tol);

  std::vector<Matrix> weights = g.weights();
  auto cost_of = [&](const std::vector<Matrix>& ws) {
    const Matrix Q = detail::q_matrix(dec, blkdiag(ws));
    double reg = 0.0;
    for (const Matrix& W : ws) reg += (W.transpose() * W).trace();
    return Q.trace() + 0.5 * h * reg;
  };
  auto any_active = [&](const std::vector<Matrix>& ws) {
    for (const Matrix& W : ws)
      if (min_eig_sym(W - box.W_min) < tol.box_activity ||
          min_eig_sym(box.W_max - W) < tol.box_activity)
        return true;
    return false;
  };

  DescentReport rep;
  rep.iterates.push_back(weights);
  rep.costs.push_back(cost_of(weights));
  rep.box_active.push_back(any_active(weights));

  for (int t = 1; t <= max_iter; ++t) {
    const Matrix Q = detail::q_matrix(dec, blkdiag(weights));
    const Matrix QQ = Q * Q;
    const double step = 1.0 / (h * std::sqrt(static_cast<double>(t)));
    for (int e = 0; e < m; ++e) {
      const Matrix blk = QQ.block(static_cast<Eigen::Index>(e) * k,
                                  static_cast<Eigen::Index>(e) * k, k, k);
      const Matrix grad = symmetrize(-blk + h * weights[e]);
      weights[e] = project_weight_box(weights[e] - step * grad, box, tol);
    }
    rep.iterates.push_back(weights);
    rep.costs.push_back(cost_of(weights));
    rep.box_active.push_back(any_active(weights));
    rep.iterations = t;
    const double prev = rep.costs[rep.costs.size() - 2];
    if (std::abs(rep.costs.back() - prev) < tol_rel * std::max(1.0, std::abs(prev))) {
      rep.converged = true;
      break;
    }
  }
  return rep;
}

/// Analytic time-scale assignment: eps*_i = Proj_[eps_min, eps_max] of
/// (deg(i) / (h r))^(1/(r+1)), identical across the substates of a node.
/// Decentralized: node i needs only its own degree and (h, r).
inline Matrix assign_timescales(const MatrixWeightedGraph& g, const TimescaleBox& box) {
  const int n = g.node_count();
  const int k = g.substate_dim();
  Matrix eps(n, k);
  for (int i = 0; i < n; ++i) {
    const double interior =
        std::pow(static_cast<double>(g.degree(i)) / (box.h * box.r), 1.0 / (box.r + 1));
    const double clamped = std::min(std::max(interior, box.eps_min), box.eps_max);
    for (int j = 0; j < k; ++j) eps(i, j) = clamped;
  }
  return eps;
}

/// P2 objective: sum_i sum_j deg(i)/eps_{i,j} / 2 + (h/2) sum_i sum_j eps_{i,j}^r.
/// The two trace forms of the H2 part, tr(R' L_es R) and tr(E^{-1} L), are
/// asserted equal before returning.
inline double p2_cost(const MatrixWeightedGraph& g, const TimescaleBox& box,
                      const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix L_es = scaled_edge_laplacian(g, dec);
  const double tr_edge = (dec.R_x.transpose() * L_es * dec.R_x).trace();

  const Vector e_inv = g.timescale_diagonal().cwiseInverse();
  const Matrix L_unweighted = dec.D_x * dec.D_x.transpose();
  double tr_node = 0.0;
  for (Eigen::Index i = 0; i < e_inv.size(); ++i) tr_node += e_inv(i) * L_unweighted(i, i);
  if (std::abs(tr_edge - tr_node) > tol.trace_identity * std::max(1.0, std::abs(tr_node)))
    throw Error("p2_cost: trace identity tr(R' L_es R) == tr(E^{-1} L) violated");

  double penalty = 0.0;
  for (int i = 0; i < g.node_count(); ++i)
    for (int j = 0; j < g.substate_dim(); ++j)
      penalty += std::pow(g.timescales()(i, j), box.r);
  return 0.5 * tr_node + 0.5 * box.h * penalty;
}

}  // namespace matnet
