#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matnet/design.hpp"
#include "matnet/incidence.hpp"
#include "matnet/rng.hpp"

namespace matnet {

/// What gets redesigned when the gust hits: nothing, the edge weights, the
/// time scales, or both.
enum class Scenario { NUD, WUD, TUD, BUD };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::NUD: return "NUD";
    case Scenario::WUD: return "WUD";
    case Scenario::TUD: return "TUD";
    default: return "BUD";
  }
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "NUD") return Scenario::NUD;
  if (s == "WUD") return Scenario::WUD;
  if (s == "TUD") return Scenario::TUD;
  if (s == "BUD") return Scenario::BUD;
  throw ParseError("unknown scenario '" + s + "'");
}

struct SimConfig {
  double dt = 1e-3;
  double t_end = 30.0;
  double t_on = 10.0;   // gust window start
  double t_off = 20.0;  // gust window end
  double sigma_w = 5.0;
  double sigma_v = 5.0;
  Scenario scenario = Scenario::NUD;
  std::uint64_t seed = 0;
  std::vector<Vector> formation;  // d_i, one k-vector per node

  // Initial state; zeros when absent.
  std::optional<Vector> x0;
  std::optional<Vector> v0;

  // Design parameters applied at t_on by WUD/TUD/BUD.
  double design_h = 0.01;
  std::optional<WeightBox> weight_box;             // required for WUD/BUD
  TimescaleBox ts_box{0.1, 100.0, 0.01, 1};

  void validate(const MatrixWeightedGraph& g) const {
    if (!(dt > 0.0)) throw ConfigInvalid("SimConfig: dt must be positive");
    if (!(0.0 <= t_on && t_on < t_off && t_off <= t_end))
      throw ConfigInvalid("SimConfig: need 0 <= t_on < t_off <= t_end");
    if (!(sigma_w >= 0.0) || !(sigma_v >= 0.0))
      throw ConfigInvalid("SimConfig: noise levels must be nonnegative");
    if (static_cast<int>(formation.size()) != g.node_count())
      throw ConfigInvalid("SimConfig: one formation offset per node required");
    for (const Vector& d : formation)
      if (d.size() != g.substate_dim())
        throw ConfigInvalid("SimConfig: formation offsets must be k-dimensional");
    if ((scenario == Scenario::WUD || scenario == Scenario::BUD) && !weight_box)
      throw ConfigInvalid("SimConfig: weight box required for weight updates");
    const Eigen::Index kn = static_cast<Eigen::Index>(g.node_count()) * g.substate_dim();
    if ((x0 && x0->size() != kn) || (v0 && v0->size() != kn))
      throw ConfigInvalid("SimConfig: initial state must have length kn");
  }
};

/// Time-indexed states of one run. Rows are samples on the uniform grid,
/// node columns are node-major (i*k + j), edge columns edge-major. Edge
/// states are recomputed as D' x at every sample, never integrated.
struct SimTrace {
  Scenario scenario = Scenario::NUD;
  std::vector<double> times;
  Matrix node_states;      // (steps+1) x kn
  Matrix node_velocities;  // (steps+1) x kn
  Matrix edge_states;      // (steps+1) x km
  Matrix variance;         // (steps+1) x km, [x_e(t) - x_e(t_f)]^2
};

/// Elementwise squared deviation of the edge states from their final value.
inline Matrix variance_metric(const SimTrace& trace) {
  if (trace.edge_states.rows() == 0) throw ConfigInvalid("variance_metric: empty trace");
  const auto last = trace.edge_states.row(trace.edge_states.rows() - 1);
  return (trace.edge_states.rowwise() - last).array().square().matrix();
}

/// Euler-Maruyama integration of the second-order formation protocol
///   E xddot = -L_w (x - d) - L_w xdot + gust noise,
/// with the relative offsets entering every neighbour term pairwise, so the
/// formation x = d (up to a consensus shift) is an exact equilibrium. Inside
/// the gust window, process noise (covariance sigma_w^2 I) enters the node
/// accelerations and measurement noise (covariance sigma_v^2 W) enters
/// through the incidence matrix; both increments scale with sqrt(dt).
/// At t_on, WUD reruns the weight design, TUD the time-scale assignment,
/// BUD both; NUD leaves the graph untouched.
inline SimTrace simulate(const MatrixWeightedGraph& g, const SimConfig& cfg,
                         const Tolerances& tol = default_tolerances()) {
  cfg.validate(g);
  const int n = g.node_count();
  const int k = g.substate_dim();
  const int m = g.edge_count();
  const Eigen::Index kn = static_cast<Eigen::Index>(n) * k;
  const Eigen::Index km = static_cast<Eigen::Index>(m) * k;

  const IncidenceDecomposition dec = incidence(g, tol);
  Vector d(kn);
  for (int i = 0; i < n; ++i) d.segment(static_cast<Eigen::Index>(i) * k, k) = cfg.formation[i];

  MatrixWeightedGraph current = g;
  Matrix L_w = weighted_laplacian(current);
  Matrix noise_edge = dec.D_x * (cfg.sigma_v * current.weight_blkdiag_sqrt());
  Vector e_inv = current.timescale_diagonal().cwiseInverse();

  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  const int step_on = static_cast<int>(std::llround(cfg.t_on / cfg.dt));
  const int step_off = static_cast<int>(std::llround(cfg.t_off / cfg.dt));
  const double sqrt_dt = std::sqrt(cfg.dt);

  SimTrace trace;
  trace.scenario = cfg.scenario;
  trace.times.resize(steps + 1);
  trace.node_states.resize(steps + 1, kn);
  trace.node_velocities.resize(steps + 1, kn);
  trace.edge_states.resize(steps + 1, km);

  Vector x = cfg.x0 ? *cfg.x0 : Vector::Zero(kn);
  Vector v = cfg.v0 ? *cfg.v0 : Vector::Zero(kn);
  trace.times[0] = 0.0;
  trace.node_states.row(0) = x.transpose();
  trace.node_velocities.row(0) = v.transpose();
  trace.edge_states.row(0) = (dec.D_x.transpose() * x).transpose();

  Rng rng(cfg.seed);
  Vector xi(kn), zeta(km);
  bool updated = false;

  for (int s = 0; s < steps; ++s) {
    if (!updated && s == step_on && cfg.scenario != Scenario::NUD) {
      updated = true;
      if (cfg.scenario == Scenario::TUD || cfg.scenario == Scenario::BUD) {
        current = current.with_timescales(assign_timescales(current, cfg.ts_box), tol);
        e_inv = current.timescale_diagonal().cwiseInverse();
      }
      if (cfg.scenario == Scenario::WUD || cfg.scenario == Scenario::BUD) {
        const DescentReport rep =
            optimize_weights(current, *cfg.weight_box, cfg.design_h, -1, -1.0, tol);
        current = current.with_weights(rep.iterates.back(), tol);
        L_w = weighted_laplacian(current);
        noise_edge = dec.D_x * (cfg.sigma_v * current.weight_blkdiag_sqrt());
      }
    }

    Vector accel = -(L_w * (x - d)) - L_w * v;
    v += cfg.dt * e_inv.cwiseProduct(accel);
    if (s >= step_on && s < step_off) {
      for (Eigen::Index i = 0; i < kn; ++i) xi(i) = rng.gaussian();
      for (Eigen::Index i = 0; i < km; ++i) zeta(i) = rng.gaussian();
      const Vector burst = cfg.sigma_w * xi + noise_edge * zeta;
      v += sqrt_dt * e_inv.cwiseProduct(burst);
    }
    x += cfg.dt * v;

    trace.times[s + 1] = (s + 1) * cfg.dt;
    trace.node_states.row(s + 1) = x.transpose();
    trace.node_velocities.row(s + 1) = v.transpose();
    trace.edge_states.row(s + 1) = (dec.D_x.transpose() * x).transpose();

    if ((s & 0xff) == 0 && !(x.allFinite() && v.allFinite()))
      throw NonFiniteState("simulate: state diverged at t = " + std::to_string(s * cfg.dt));
  }
  if (!(x.allFinite() && v.allFinite()))
    throw NonFiniteState("simulate: state diverged before t_end");

  trace.variance = variance_metric(trace);
  return trace;
}

/// All four scenarios under common random numbers: identical seed, hence
/// identical noise draws and bitwise identical trajectories until t_on.
inline std::map<Scenario, SimTrace> run_scenarios(const MatrixWeightedGraph& g,
                                                  const SimConfig& base,
                                                  const Tolerances& tol = default_tolerances()) {
  std::map<Scenario, SimTrace> out;
  for (Scenario sc : {Scenario::NUD, Scenario::WUD, Scenario::TUD, Scenario::BUD}) {
    SimConfig cfg = base;
    cfg.scenario = sc;
    out.emplace(sc, simulate(g, cfg, tol));
  }
  return out;
}

/// Mean over edge components and over samples from t_on onward of
/// Var[x_e(t)]; the summary number used to compare scenarios.
inline double mean_post_gust_variance(const SimTrace& trace, double t_on) {
  Eigen::Index first = 0;
  while (first < static_cast<Eigen::Index>(trace.times.size()) && trace.times[first] < t_on)
    ++first;
  const Eigen::Index rows = trace.variance.rows() - first;
  if (rows <= 0) throw ConfigInvalid("mean_post_gust_variance: no samples after t_on");
  return trace.variance.bottomRows(rows).mean();
}

}  // namespace matnet
