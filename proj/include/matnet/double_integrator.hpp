#pragma once

#include "matnet/h2.hpp"

namespace matnet {

/// Double-integrator consensus reduced to the spanning-tree edge states:
///   [xdot_tau; xddot_tau] = [[0, I], [-L_e R W R', -L_e R W R']] [x_tau; xdot_tau]
///                           + [[0, 0], [D_tau' E^{-1}, -L_e R]] [Omega w; Gamma v].
/// L_e is the scaled edge Laplacian D_tau' E^{-1} D_tau, which reduces to the
/// unscaled one at unit scales.
struct DoubleIntegratorModel {
  Matrix A;        // 2k(n-1) square
  Matrix B_omega;  // [0; D_tau' E^{-1}]
  Matrix B_v;      // [0; -L_e R]
  Matrix L_e;
};

inline DoubleIntegratorModel di_model(const MatrixWeightedGraph& g,
                                      const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix L_e = scaled_edge_laplacian(g, dec);
  const Matrix RWRt = dec.R_x * g.weight_blkdiag() * dec.R_x.transpose();
  const Vector e_inv = g.timescale_diagonal().cwiseInverse();
  const Eigen::Index p = L_e.rows();

  DoubleIntegratorModel mdl;
  mdl.L_e = L_e;
  mdl.A = Matrix::Zero(2 * p, 2 * p);
  mdl.A.topRightCorner(p, p) = Matrix::Identity(p, p);
  mdl.A.bottomLeftCorner(p, p) = -L_e * RWRt;
  mdl.A.bottomRightCorner(p, p) = -L_e * RWRt;

  const Matrix Bw_top = dec.D_tau_x.transpose() * e_inv.asDiagonal();
  mdl.B_omega = Matrix::Zero(2 * p, Bw_top.cols());
  mdl.B_omega.bottomRows(p) = Bw_top;

  mdl.B_v = Matrix::Zero(2 * p, dec.R_x.cols());
  mdl.B_v.bottomRows(p) = -L_e * dec.R_x;

  if (p > 0 && max_real_eig(mdl.A) >= -tol.hurwitz_margin * mdl.A.norm())
    throw NotHurwitz("di_model: state matrix is not Hurwitz");
  return mdl;
}

/// Closed-form block gramian of the double-integrator edge model under the
/// special covariance choice; X1 pairs with positions, X2 with velocities,
/// the cross block vanishes. Stored blocks include the 1/2 factor:
///   X1 = ((R W R')^{-1} L_e^{-1} (R W R')^{-1} sigma_w^2
///         + (R W R')^{-1} sigma_v^2) / 2,
///   X2 = ((R W R')^{-1} sigma_w^2 + L_e sigma_v^2) / 2.
struct BlockGramian {
  Matrix X1;
  Matrix X2;
  Matrix X3;  // zero by the closed form; a blind solve confirms it
};

inline BlockGramian di_gramian(const MatrixWeightedGraph& g, double sigma_w, double sigma_v,
                               const Tolerances& tol = default_tolerances()) {
  if (!(sigma_w >= 0.0) || !(sigma_v >= 0.0))
    throw ConfigInvalid("di_gramian: sigmas must be nonnegative");
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix L_e = scaled_edge_laplacian(g, dec);
  const Matrix RWRt = dec.R_x * g.weight_blkdiag() * dec.R_x.transpose();
  const Eigen::Index p = L_e.rows();

  const Matrix I = Matrix::Identity(p, p);
  const Matrix RWRt_inv = RWRt.llt().solve(I);
  const Matrix L_e_inv = L_e.llt().solve(I);
  const double sw2 = sigma_w * sigma_w;
  const double sv2 = sigma_v * sigma_v;

  BlockGramian bg;
  bg.X1 = symmetrize(0.5 * (sw2 * RWRt_inv * L_e_inv * RWRt_inv + sv2 * RWRt_inv));
  bg.X2 = symmetrize(0.5 * (sw2 * RWRt_inv + sv2 * L_e));
  bg.X3 = Matrix::Zero(p, p);

  // Residual of the full 2x2-block Lyapunov equation with
  // BB' = blockdiag(0, sigma_w^2 L_e + sigma_v^2 L_e R W R' L_e).
  Matrix A = Matrix::Zero(2 * p, 2 * p);
  A.topRightCorner(p, p) = I;
  A.bottomLeftCorner(p, p) = -L_e * RWRt;
  A.bottomRightCorner(p, p) = -L_e * RWRt;
  Matrix X = Matrix::Zero(2 * p, 2 * p);
  X.topLeftCorner(p, p) = bg.X1;
  X.bottomRightCorner(p, p) = bg.X2;
  Matrix BB = Matrix::Zero(2 * p, 2 * p);
  BB.bottomRightCorner(p, p) = sw2 * L_e + sv2 * L_e * RWRt * L_e;

  if (lyapunov_residual(A, BB, X) > tol.lyap_residual * (1.0 + X.norm()))
    throw SolveFailed("di_gramian: closed-form residual check failed");
  return bg;
}

enum class H2Component { Position, Velocity, Aggregate };

/// H2 of the position, velocity, or aggregate edge states. With the stored
/// half-scaled blocks this is tr(R' X1 R), tr(R' X2 R) or their sum.
inline double di_h2(const MatrixWeightedGraph& g, double sigma_w, double sigma_v,
                    H2Component which, const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const BlockGramian bg = di_gramian(g, sigma_w, sigma_v, tol);
  const Matrix& R = dec.R_x;
  switch (which) {
    case H2Component::Position:
      return (R.transpose() * bg.X1 * R).trace();
    case H2Component::Velocity:
      return (R.transpose() * bg.X2 * R).trace();
    case H2Component::Aggregate:
    default:
      return (R.transpose() * (bg.X1 + bg.X2) * R).trace();
  }
}

}  // namespace matnet
