#pragma once

#include "matnet/incidence.hpp"

namespace matnet {

/// The change of coordinates that splits the scaled consensus dynamics into
/// spanning-tree edge states and the k-dimensional consensus subspace:
///   S_v   = [ E^{-1} D_tau (D_tau' E^{-1} D_tau)^{-1} , 1_n (x) I_k ]
///   S_v^{-1} = [ D_tau' ; Xi^{-1} F ]
/// with F = [E_1 ... E_n] and Xi = diag(sum_j eps_{j,i}).
struct SimilarityPair {
  Matrix S_v;      // kn x kn
  Matrix S_v_inv;  // kn x kn
  Matrix Xi;       // k x k diagonal
  Matrix F;        // k x kn block row
  Matrix One;      // kn x k, 1_n (x) I_k
};

inline SimilarityPair similarity_pair(const MatrixWeightedGraph& g,
                                      const IncidenceDecomposition& dec,
                                      const Tolerances& tol = default_tolerances()) {
  const int n = g.node_count();
  const int k = g.substate_dim();
  const Eigen::Index kn = static_cast<Eigen::Index>(n) * k;

  const Vector e = g.timescale_diagonal();
  const Vector e_inv = e.cwiseInverse();

  SimilarityPair sp;
  sp.One = Matrix::Zero(kn, k);
  for (int i = 0; i < n; ++i) sp.One.block(i * k, 0, k, k) = Matrix::Identity(k, k);

  sp.F = Matrix::Zero(k, kn);
  for (int i = 0; i < n; ++i)
    sp.F.block(0, i * k, k, k) =
        e.segment(static_cast<Eigen::Index>(i) * k, k).asDiagonal();

  Vector xi = Vector::Zero(k);
  for (int i = 0; i < n; ++i) xi += e.segment(static_cast<Eigen::Index>(i) * k, k);
  sp.Xi = xi.asDiagonal();

  // Left block of S_v via the SPD factorization of the scaled tree gram.
  const Matrix gram = dec.D_tau_x.transpose() * e_inv.asDiagonal() * dec.D_tau_x;
  const Matrix left =
      e_inv.asDiagonal() * dec.D_tau_x *
      gram.llt().solve(Matrix::Identity(gram.rows(), gram.cols()));

  sp.S_v.resize(kn, kn);
  sp.S_v << left, sp.One;

  sp.S_v_inv.resize(kn, kn);
  sp.S_v_inv.topRows(kn - k) = dec.D_tau_x.transpose();
  sp.S_v_inv.bottomRows(k) = xi.cwiseInverse().asDiagonal() * sp.F;

  const double dev =
      (sp.S_v_inv * sp.S_v - Matrix::Identity(kn, kn)).cwiseAbs().maxCoeff();
  if (dev > tol.ill_conditioned)
    throw IllConditioned("similarity_pair: S_v_inv * S_v deviates from identity by " +
                         std::to_string(dev));
  return sp;
}

/// S_v^{-1} (E^{-1} L_w) S_v; equals blockdiag(L_es R W R', 0_k) up to
/// numerical error for connected graphs.
inline Matrix transformed_laplacian(const MatrixWeightedGraph& g,
                                    const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const SimilarityPair sp = similarity_pair(g, dec, tol);
  const Vector e_inv = g.timescale_diagonal().cwiseInverse();
  const Matrix L_ws = e_inv.asDiagonal() * weighted_laplacian(g);
  return sp.S_v_inv * L_ws * sp.S_v;
}

/// Reduced state-space model on the spanning-tree edge states:
///   xdot_tau = A x_tau + B_omega (Omega w) + B_v (Gamma v),  z = C x_tau.
struct TreeModel {
  Matrix A;        // -L_es R W R'
  Matrix B_omega;  // D_tau' E^{-1}
  Matrix B_v;      // -L_es R
  Matrix C;        // R'
};

inline TreeModel tree_model(const MatrixWeightedGraph& g,
                            const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix L_es = scaled_edge_laplacian(g, dec);
  const Matrix RWRt = dec.R_x * g.weight_blkdiag() * dec.R_x.transpose();
  const Vector e_inv = g.timescale_diagonal().cwiseInverse();

  TreeModel tm;
  tm.A = -L_es * RWRt;
  tm.B_omega = dec.D_tau_x.transpose() * e_inv.asDiagonal();
  tm.B_v = -L_es * dec.R_x;
  tm.C = dec.R_x.transpose();

  if (tm.A.rows() > 0 && max_real_eig(tm.A) >= -tol.hurwitz_margin * tm.A.norm())
    throw NotHurwitz("tree_model: state matrix is not Hurwitz");
  return tm;
}

}  // namespace matnet
