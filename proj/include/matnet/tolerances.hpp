#pragma once

namespace matnet {

/// Numerical tolerances shared by the library, the tests and the CLI.
/// Every threshold used by a runtime check lives here so that there is a
/// single source of truth.
struct Tolerances {
  // Exact structural identities (D = D_tau R, Kronecker expansions).
  double exact_identity = 1e-12;

  // Symmetry of assembled matrices and returned gramians.
  double symmetry = 1e-10;

  // S_v_inv * S_v deviation: warn level (invariant) and hard failure level.
  double similarity_product = 1e-10;
  double ill_conditioned = 1e-8;

  // Norm of the trailing k x k block of the transformed Laplacian.
  double similarity_zero_block = 1e-9;

  // Lyapunov residual, relative: ||A X + X A' + Q|| <= lyap_residual * (1 + ||X||).
  double lyap_residual = 1e-8;

  // Hurwitz test: max Re(lambda) < -hurwitz_margin * ||A||.
  double hurwitz_margin = 1e-12;

  // Agreement between the tree H2 formula and tr(X*).
  double tree_formula = 1e-10;

  // P2 trace identity tr(R' L_es R) == tr(E^-1 L).
  double trace_identity = 1e-10;

  // Eigenvalue slack allowed when certifying PSD orderings.
  double psd_order = 1e-9;

  // Dykstra projection onto the weight box.
  double dykstra_fixpoint = 1e-10;
  int dykstra_max_sweeps = 500;

  // Slack below which a box constraint counts as active.
  double box_activity = 1e-8;

  // Projected gradient descent stopping rule.
  double descent_tol = 1e-8;
  int descent_max_iter = 200;

  // Resampling budget of the SPD weight generator.
  int spd_max_attempts = 1000;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace matnet
