#pragma once

#include <cmath>
#include <vector>

#include "matnet/linalg.hpp"
#include "matnet/rng.hpp"
#include "matnet/tolerances.hpp"

namespace matnet {

/// W = alpha * ((G + G')/2 + 2 I) for a given Gaussian sample G.
inline Matrix spd_weight_from_sample(double alpha, const Matrix& G) {
  const int k = static_cast<int>(G.rows());
  return alpha * (0.5 * (G + G.transpose()) + 2.0 * Matrix::Identity(k, k));
}

/// Random SPD edge weight: the Gaussian-shifted generator, resampled until
/// the draw is positive definite (the symmetric part can push an eigenvalue
/// below -2, so rejection keeps the distribution conditioned on validity).
inline Matrix random_spd_weight(double alpha, int k, Rng& rng,
                                const Tolerances& tol = default_tolerances()) {
  if (!(alpha > 0.0) || k < 1) throw ConfigInvalid("random_spd_weight: alpha > 0, k >= 1 required");
  for (int attempt = 0; attempt < tol.spd_max_attempts; ++attempt) {
    Matrix G(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) G(i, j) = rng.gaussian();
    Matrix W = spd_weight_from_sample(alpha, G);
    if (min_eig_sym(W) > 0.0) return W;
  }
  throw GenerationFailed("random_spd_weight: no SPD draw within attempt budget");
}

/// Formation offsets on an Archimedean spiral r = spacing * theta, sampled at
/// theta_i = (i-1) * pi/4. The first point sits at the origin and radii are
/// strictly increasing.
inline std::vector<Eigen::Vector2d> spiral_formation(int n, double spacing) {
  if (n < 1 || !(spacing > 0.0)) throw ConfigInvalid("spiral_formation: n >= 1, spacing > 0");
  constexpr double kTheta = M_PI / 4.0;
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double theta = i * kTheta;
    const double r = spacing * theta;
    pts.emplace_back(r * std::cos(theta), r * std::sin(theta));
  }
  return pts;
}

}  // namespace matnet
