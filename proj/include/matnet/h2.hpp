#pragma once

#include <utility>

#include "matnet/edge_transform.hpp"
#include "matnet/lyapunov.hpp"

namespace matnet {

/// Process/measurement noise description. Either explicit covariance factors
/// (Omega: kn x kn, Gamma: k|E| x k|E|, both symmetric PSD) or the special
/// scalar pair which expands on demand to Omega = sigma_w E^{1/2},
/// Gamma = sigma_v W^{1/2}. The special choice separates the weight and
/// time-scale contributions in the closed-form gramian.
struct NoiseModel {
  enum class Kind { Special, General };
  Kind kind = Kind::Special;
  double sigma_w = 1.0;
  double sigma_v = 1.0;
  Matrix Omega;
  Matrix Gamma;

  static NoiseModel special(double sigma_w, double sigma_v) {
    if (!(sigma_w >= 0.0) || !(sigma_v >= 0.0))
      throw ConfigInvalid("NoiseModel: sigmas must be nonnegative");
    NoiseModel nm;
    nm.kind = Kind::Special;
    nm.sigma_w = sigma_w;
    nm.sigma_v = sigma_v;
    return nm;
  }

  static NoiseModel general(Matrix Omega, Matrix Gamma,
                            const Tolerances& tol = default_tolerances()) {
    if (!is_symmetric(Omega, tol.symmetry) || !is_symmetric(Gamma, tol.symmetry))
      throw ConfigInvalid("NoiseModel: covariance factors must be symmetric");
    if (min_eig_sym(Omega) < -tol.psd_order || min_eig_sym(Gamma) < -tol.psd_order)
      throw ConfigInvalid("NoiseModel: covariance factors must be PSD");
    NoiseModel nm;
    nm.kind = Kind::General;
    nm.Omega = std::move(Omega);
    nm.Gamma = std::move(Gamma);
    return nm;
  }

  /// Concrete (Omega, Gamma) factors for a given graph.
  std::pair<Matrix, Matrix> factors(const MatrixWeightedGraph& g) const {
    if (kind == Kind::General) {
      const Eigen::Index kn = static_cast<Eigen::Index>(g.node_count()) * g.substate_dim();
      const Eigen::Index km = static_cast<Eigen::Index>(g.edge_count()) * g.substate_dim();
      if (Omega.rows() != kn || Gamma.rows() != km)
        throw ConfigInvalid("NoiseModel: factor dimensions do not match the graph");
      return {Omega, Gamma};
    }
    const Vector e_half = g.timescale_diagonal().cwiseSqrt();
    return {sigma_w * Matrix(e_half.asDiagonal()), sigma_v * g.weight_blkdiag_sqrt()};
  }
};

/// Solution of the edge-space Lyapunov equation plus the H2 value.
struct GramianResult {
  Matrix X;         // k(n-1) square, symmetric PSD
  double h2;        // tr(R' X R)
  double residual;  // Lyapunov residual norm of X
};

namespace detail {

inline double trace_rxr(const Matrix& R_x, const Matrix& X) {
  return (R_x.transpose() * X * R_x).trace();
}

// Input term of the edge Lyapunov equation for given covariance factors.
inline Matrix edge_noise_input(const IncidenceDecomposition& dec, const Matrix& L_es,
                               const Vector& e_inv, const Matrix& Omega, const Matrix& Gamma) {
  const Matrix Bw = dec.D_tau_x.transpose() * e_inv.asDiagonal() * Omega;
  const Matrix Bv = L_es * dec.R_x * Gamma;
  return Bw * Bw.transpose() + Bv * Bv.transpose();
}

}  // namespace detail

/// H2 performance under arbitrary PSD covariance factors: solves
///   A X + X A' + D_tau' E^{-1} Omega Omega' E^{-1} D_tau
///     + L_es R Gamma Gamma' R' L_es = 0,  A = -L_es R W R',
/// and returns X together with tr(R' X R).
inline GramianResult h2_general(const MatrixWeightedGraph& g, const NoiseModel& noise,
                                const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix L_es = scaled_edge_laplacian(g, dec);
  const Matrix RWRt = dec.R_x * g.weight_blkdiag() * dec.R_x.transpose();
  const Matrix A = -L_es * RWRt;
  const Vector e_inv = g.timescale_diagonal().cwiseInverse();

  const auto [Omega, Gamma] = noise.factors(g);
  const Matrix QQ = detail::edge_noise_input(dec, L_es, e_inv, Omega, Gamma);

  GramianResult res;
  res.X = solve_lyapunov(A, QQ, tol);
  res.residual = lyapunov_residual(A, QQ, res.X);
  res.h2 = detail::trace_rxr(dec.R_x, res.X);
  return res;
}

/// Closed-form gramian under the special covariance choice:
///   X* = (sigma_w^2 (R W R')^{-1} + sigma_v^2 L_es) / 2.
/// The Lyapunov residual of X* is verified before returning; a violation
/// signals an implementation bug, not bad input.
inline GramianResult h2_closed_form(const MatrixWeightedGraph& g, double sigma_w, double sigma_v,
                                    const Tolerances& tol = default_tolerances()) {
  if (!(sigma_w >= 0.0) || !(sigma_v >= 0.0))
    throw ConfigInvalid("h2_closed_form: sigmas must be nonnegative");
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix L_es = scaled_edge_laplacian(g, dec);
  const Matrix RWRt = dec.R_x * g.weight_blkdiag() * dec.R_x.transpose();

  const Matrix RWRt_inv = RWRt.llt().solve(Matrix::Identity(RWRt.rows(), RWRt.cols()));
  GramianResult res;
  res.X = symmetrize(0.5 * (sigma_w * sigma_w * RWRt_inv + sigma_v * sigma_v * L_es));

  const Matrix A = -L_es * RWRt;
  const Matrix QQ = sigma_w * sigma_w * L_es + sigma_v * sigma_v * L_es * RWRt * L_es;
  res.residual = lyapunov_residual(A, QQ, res.X);
  if (res.residual > tol.lyap_residual * (1.0 + res.X.norm()))
    throw SolveFailed("h2_closed_form: closed-form residual check failed");
  res.h2 = detail::trace_rxr(dec.R_x, res.X);
  return res;
}

/// Tree-graph H2 in closed form:
///   ( sigma_w^2 sum_e tr(W_e^{-1}) + sigma_v^2 sum_l sum_i deg(i)/eps_{i,l} ) / 2.
inline double h2_tree_formula(const MatrixWeightedGraph& g, double sigma_w, double sigma_v) {
  if (!g.is_tree()) throw NotATree("h2_tree_formula: graph has cycles");
  double weight_term = 0.0;
  for (const Matrix& W : g.weights())
    weight_term += W.llt().solve(Matrix::Identity(W.rows(), W.cols())).trace();
  double scale_term = 0.0;
  for (int i = 0; i < g.node_count(); ++i)
    for (int l = 0; l < g.substate_dim(); ++l)
      scale_term += g.degree(i) / g.timescales()(i, l);
  return 0.5 * (sigma_w * sigma_w * weight_term + sigma_v * sigma_v * scale_term);
}

/// Multiplicative factors bracketing true covariances against the special
/// pair, with the worst-case H2 error they induce.
struct FactorBounds {
  double alpha_lo = 0.0, alpha_hi = 0.0;  // alpha_lo E^{1/2} <= Omega_T <= alpha_hi E^{1/2}
  double beta_lo = 0.0, beta_hi = 0.0;    // beta_lo W^{1/2} <= Gamma_T <= beta_hi W^{1/2}
  double gap = 0.0;                       // worst-case H2 error at unit sigmas
};

enum class BoundDirection { Upper, Lower };

/// Extremal factor of the pair (M, P): the smallest alpha with M <= alpha P
/// (Upper) or the largest alpha with alpha P <= M (Lower), computed
/// spectrally as the extremal eigenvalue of P^{-1/2} M P^{-1/2}.
inline double tight_factor(const Matrix& M, const Matrix& P, BoundDirection dir) {
  const Matrix Pinv_half = sym_inv_sqrt(P);  // throws NonPD
  const Matrix congruent = Pinv_half * M * Pinv_half;
  return dir == BoundDirection::Upper ? max_eig_sym(congruent) : min_eig_sym(congruent);
}

/// Worst-case H2 error between the upper and lower factor solutions:
///   (alpha_hi - alpha_lo) sigma_w^2 tr((R W R')^{-1}) / 2
///     + (beta_hi - beta_lo) sigma_v^2 tr(L_es) / 2.
inline double performance_gap(const FactorBounds& bounds, const MatrixWeightedGraph& g,
                              double sigma_w, double sigma_v,
                              const Tolerances& tol = default_tolerances()) {
  const IncidenceDecomposition dec = incidence(g, tol);
  const Matrix L_es = scaled_edge_laplacian(g, dec);
  const Matrix RWRt = dec.R_x * g.weight_blkdiag() * dec.R_x.transpose();
  const double tr_inv = RWRt.llt().solve(Matrix::Identity(RWRt.rows(), RWRt.cols())).trace();
  return 0.5 * (bounds.alpha_hi - bounds.alpha_lo) * sigma_w * sigma_w * tr_inv +
         0.5 * (bounds.beta_hi - bounds.beta_lo) * sigma_v * sigma_v * L_es.trace();
}

/// Spectral-bound factors:
///   alpha_hi = lmax(Omega_T)/eps_max^{1/2}, alpha_lo = lmin(Omega_T)/eps_min^{1/2},
///   beta_hi  = lmax(Gamma_T)/lmax(W)^{1/2}, beta_lo  = lmin(Gamma_T)/lmin(W)^{1/2}.
/// These only need the spectral range of the true covariances, but they do
/// not certify the orderings for arbitrary (non-aligned) inputs, so the
/// orderings are verified by eigenvalue check; OrderingViolated signals that
/// the caller should fall back to tight_factor.
inline FactorBounds sufficient_factors(const Matrix& OmegaT, const Matrix& GammaT,
                                       const MatrixWeightedGraph& g,
                                       const Tolerances& tol = default_tolerances()) {
  const Vector e = g.timescale_diagonal();
  const Matrix W = g.weight_blkdiag();

  FactorBounds b;
  b.alpha_hi = max_eig_sym(OmegaT) / std::sqrt(e.maxCoeff());
  b.alpha_lo = min_eig_sym(OmegaT) / std::sqrt(e.minCoeff());
  b.beta_hi = max_eig_sym(GammaT) / std::sqrt(max_eig_sym(W));
  b.beta_lo = min_eig_sym(GammaT) / std::sqrt(min_eig_sym(W));

  const Matrix E_half = Matrix(e.cwiseSqrt().asDiagonal());
  const Matrix W_half = g.weight_blkdiag_sqrt();
  const double checks[4] = {
      min_eig_sym(b.alpha_hi * E_half - OmegaT),
      min_eig_sym(OmegaT - b.alpha_lo * E_half),
      min_eig_sym(b.beta_hi * W_half - GammaT),
      min_eig_sym(GammaT - b.beta_lo * W_half),
  };
  for (double c : checks)
    if (c < -tol.psd_order)
      throw OrderingViolated(
          "sufficient_factors: spectral-bound factors do not certify the ordering; "
          "use tight_factor");

  b.gap = performance_gap(b, g, 1.0, 1.0, tol);
  return b;
}

/// Tight factors for all four bounds, assembled via tight_factor.
inline FactorBounds tight_factors(const Matrix& OmegaT, const Matrix& GammaT,
                                  const MatrixWeightedGraph& g,
                                  const Tolerances& tol = default_tolerances()) {
  const Matrix E_half = Matrix(g.timescale_diagonal().cwiseSqrt().asDiagonal());
  const Matrix W_half = g.weight_blkdiag_sqrt();
  FactorBounds b;
  b.alpha_hi = tight_factor(OmegaT, E_half, BoundDirection::Upper);
  b.alpha_lo = tight_factor(OmegaT, E_half, BoundDirection::Lower);
  b.beta_hi = tight_factor(GammaT, W_half, BoundDirection::Upper);
  b.beta_lo = tight_factor(GammaT, W_half, BoundDirection::Lower);
  b.gap = performance_gap(b, g, 1.0, 1.0, tol);
  return b;
}

}  // namespace matnet
