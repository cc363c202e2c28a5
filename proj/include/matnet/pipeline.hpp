#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "matnet/csv.hpp"
#include "matnet/flocking.hpp"
#include "matnet/generators.hpp"
#include "matnet/graph_io.hpp"
#include "matnet/manifest.hpp"

namespace matnet {

/// One trace file per scenario: long form, entity ids 1-based.
/// series is one of position, velocity, edge, variance.
inline void write_trace_csv(const SimTrace& trace, const MatrixWeightedGraph& g,
                            const std::string& path, int decimate = 10) {
  if (decimate < 1) decimate = 1;
  const int k = g.substate_dim();
  CsvWriter csv(path);
  csv.header({"time", "entity_id", "substate", "value", "series"});
  const Eigen::Index rows = trace.edge_states.rows();
  auto emit_row = [&](Eigen::Index s) {
    const double t = trace.times[s];
    for (int i = 0; i < g.node_count(); ++i)
      for (int j = 0; j < k; ++j) {
        csv.field(t).field(i + 1).field(j + 1).field(trace.node_states(s, i * k + j));
        csv.field(std::string("position"));
        csv.end_row();
        csv.field(t).field(i + 1).field(j + 1).field(trace.node_velocities(s, i * k + j));
        csv.field(std::string("velocity"));
        csv.end_row();
      }
    for (int e = 0; e < g.edge_count(); ++e)
      for (int j = 0; j < k; ++j) {
        csv.field(t).field(e + 1).field(j + 1).field(trace.edge_states(s, e * k + j));
        csv.field(std::string("edge"));
        csv.end_row();
        csv.field(t).field(e + 1).field(j + 1).field(trace.variance(s, e * k + j));
        csv.field(std::string("variance"));
        csv.end_row();
      }
  };
  for (Eigen::Index s = 0; s < rows; s += decimate) emit_row(s);
  if ((rows - 1) % decimate != 0) emit_row(rows - 1);
}

inline void write_descent_csv(const DescentReport& rep, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"iteration", "cost", "box_active"});
  for (std::size_t i = 0; i < rep.costs.size(); ++i) {
    csv.field(static_cast<int>(i)).field(rep.costs[i]).field(rep.box_active[i] ? 1 : 0);
    csv.end_row();
  }
}

inline void write_timescale_csv(const MatrixWeightedGraph& g, const Matrix& eps,
                                const TimescaleBox& box, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"node", "substate", "epsilon", "box_active"});
  for (int i = 0; i < g.node_count(); ++i)
    for (int j = 0; j < g.substate_dim(); ++j) {
      const double e = eps(i, j);
      const bool active = e <= box.eps_min + 1e-12 || e >= box.eps_max - 1e-12;
      csv.field(i + 1).field(j + 1).field(e).field(active ? 1 : 0);
      csv.end_row();
    }
}

/// Per-seed scenario sweep under common random numbers; returns the mean
/// post-gust-onset variance per scenario and seed. Runs seeds in parallel
/// when threads > 1.
inline std::map<Scenario, std::vector<double>> scenario_batch(const MatrixWeightedGraph& g,
                                                              const SimConfig& base, int seeds,
                                                              int threads = 1) {
  const Scenario all[] = {Scenario::NUD, Scenario::WUD, Scenario::TUD, Scenario::BUD};
  std::map<Scenario, std::vector<double>> out;
  for (Scenario sc : all) out[sc].assign(seeds, 0.0);

  auto work = [&](int first, int last) {
    for (int r = first; r < last; ++r) {
      SimConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(r);
      const auto traces = run_scenarios(g, cfg);
      for (Scenario sc : all)
        out[sc][r] = mean_post_gust_variance(traces.at(sc), cfg.t_on);
    }
  };

  threads = std::max(1, std::min(threads, seeds));
  if (threads == 1) {
    work(0, seeds);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (seeds + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int first = t * chunk;
      const int last = std::min(seeds, first + chunk);
      if (first < last) pool.emplace_back(work, first, last);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

/// Parameters of the end-to-end example: spiral formation, random initial
/// weights, generator-drawn weight box, unit time scales, diminishing-step
/// weight design, analytic time-scale assignment and the four gust
/// scenarios.
struct PaperExampleParams {
  std::uint64_t seed = 1;
  int decimate = 10;
  int n = 10;
  int k = 2;
  double spacing = 1.0;
  double alpha_init = 0.3;
  double alpha_lo = 0.05;
  double alpha_hi = 10.0;
  double h = 0.01;
  int r = 1;
  double eps_min = 0.1;
  double eps_max = 100.0;
  double sigma_w = 5.0;
  double sigma_v = 5.0;
  double dt = 1e-3;
  double t_on = 10.0;
  double t_off = 20.0;
  double t_end = 30.0;

  std::string digest() const {
    std::ostringstream ss;
    ss << seed << '|' << decimate << '|' << n << '|' << k << '|' << spacing << '|' << alpha_init
       << '|' << alpha_lo << '|' << alpha_hi << '|' << h << '|' << r << '|' << eps_min << '|'
       << eps_max << '|' << sigma_w << '|' << sigma_v << '|' << dt << '|' << t_on << '|' << t_off
       << '|' << t_end;
    return digest_hex(fnv1a64(ss.str()));
  }
};

/// Ring-plus-chords communication topology used by the example (the edge
/// design is only interesting with cycles present).
inline std::vector<std::pair<int, int>> example_topology(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  edges.emplace_back(0, n - 1);
  if (n > 5) edges.emplace_back(0, n / 2 - 1);
  if (n > 8) edges.emplace_back(2, n - 3);
  return edges;
}

struct PaperExampleResult {
  std::optional<MatrixWeightedGraph> graph;     // initial
  std::optional<MatrixWeightedGraph> designed;  // after both updates
  std::optional<WeightBox> box;
  DescentReport descent;
  Matrix timescales;
  std::map<Scenario, double> mean_variance;  // at params.seed
  RunManifest manifest;
};

/// Builds the example instance deterministically from the seed: the weight
/// box is drawn first (redrawn until W_max - W_min is PD), then one initial
/// weight per edge, redrawn until strictly inside the box.
inline PaperExampleResult build_paper_example(const PaperExampleParams& p,
                                              const Tolerances& tol = default_tolerances()) {
  Rng rng(p.seed);
  PaperExampleResult res;

  Matrix W_min, W_max;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= tol.spd_max_attempts)
      throw GenerationFailed("paper example: no PSD-ordered box within attempt budget");
    W_min = random_spd_weight(p.alpha_lo, p.k, rng, tol);
    W_max = random_spd_weight(p.alpha_hi, p.k, rng, tol);
    if (min_eig_sym(W_max - W_min) > 0.0) break;
  }
  res.box = WeightBox::validated(W_min, W_max, tol);

  const auto edges = example_topology(p.n);
  std::vector<Matrix> weights;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    bool found = false;
    for (int attempt = 0; attempt < tol.spd_max_attempts; ++attempt) {
      Matrix W = random_spd_weight(p.alpha_init, p.k, rng, tol);
      if (res.box->contains(W, -1e-6)) {  // strictly inside
        weights.push_back(std::move(W));
        found = true;
        break;
      }
    }
    if (!found)
      throw GenerationFailed("paper example: no in-box initial weight within attempt budget");
  }

  res.graph = build_graph(p.n, p.k, edges, std::move(weights), Matrix::Ones(p.n, p.k), tol);
  return res;
}

inline SimConfig paper_example_config(const PaperExampleParams& p, const WeightBox& box) {
  SimConfig cfg;
  cfg.dt = p.dt;
  cfg.t_end = p.t_end;
  cfg.t_on = p.t_on;
  cfg.t_off = p.t_off;
  cfg.sigma_w = p.sigma_w;
  cfg.sigma_v = p.sigma_v;
  cfg.seed = p.seed;
  cfg.design_h = p.h;
  cfg.weight_box = box;
  cfg.ts_box = TimescaleBox::validated(p.eps_min, p.eps_max, p.h, p.r);
  const auto pts = spiral_formation(p.n, p.spacing);
  for (const auto& pt : pts) {
    Vector d = Vector::Zero(p.k);
    d.head(2) = pt;
    cfg.formation.push_back(d);
  }
  return cfg;
}

/// End-to-end pipeline: design, four gust scenarios, CSV emission and a
/// manifest with per-output digests. Deterministic given the seed.
inline PaperExampleResult run_paper_example(const std::string& out_dir,
                                            const PaperExampleParams& p = {},
                                            bool write_outputs = true,
                                            const Tolerances& tol = default_tolerances()) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  if (write_outputs) fs::create_directories(out_dir);
  auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

  PaperExampleResult res = build_paper_example(p, tol);
  res.manifest.command = "paper-example";
  res.manifest.seed = p.seed;
  res.manifest.config_digest = p.digest();
  res.manifest.parameters = {
      {"n", p.n},           {"k", p.k},
      {"alpha_init", p.alpha_init}, {"alpha_lo", p.alpha_lo},
      {"alpha_hi", p.alpha_hi},     {"h", p.h},
      {"r", p.r},           {"eps_min", p.eps_min},
      {"eps_max", p.eps_max},       {"sigma_w", p.sigma_w},
      {"sigma_v", p.sigma_v},       {"dt", p.dt},
      {"gust_on", p.t_on},  {"gust_off", p.t_off},
      {"t_end", p.t_end},   {"spacing", p.spacing},
      {"initial_timescales", 1.0},  {"decimate", p.decimate}};

  if (write_outputs) {
    save_graph(*res.graph, path("graph_initial.json"));
    res.manifest.add_output(path("graph_initial.json"));
  }

  // Weight design at the paper parameters.
  res.descent = optimize_weights(*res.graph, *res.box, p.h, -1, -1.0, tol);

  // Decentralized time-scale assignment.
  const TimescaleBox ts_box = TimescaleBox::validated(p.eps_min, p.eps_max, p.h, p.r);
  res.timescales = assign_timescales(*res.graph, ts_box);

  res.designed = res.graph->with_weights(res.descent.iterates.back(), tol)
                     .with_timescales(res.timescales, tol);

  if (write_outputs) {
    write_descent_csv(res.descent, path("weights_descent.csv"));
    res.manifest.add_output(path("weights_descent.csv"));
    write_timescale_csv(*res.graph, res.timescales, ts_box, path("timescales.csv"));
    res.manifest.add_output(path("timescales.csv"));
    save_graph(*res.designed, path("graph_designed.json"));
    res.manifest.add_output(path("graph_designed.json"));
  }

  // Four gust scenarios under common random numbers.
  const SimConfig cfg = paper_example_config(p, *res.box);
  const auto traces = run_scenarios(*res.graph, cfg, tol);
  for (const auto& [sc, trace] : traces) {
    res.mean_variance[sc] = mean_post_gust_variance(trace, cfg.t_on);
    if (write_outputs) {
      const std::string f = path(std::string("trace_") + to_string(sc) + ".csv");
      write_trace_csv(trace, *res.graph, f, p.decimate);
      res.manifest.add_output(f);
    }
  }

  if (write_outputs) {
    CsvWriter csv(path("summary.csv"));
    csv.header({"scenario", "mean_post_gust_variance", "seed"});
    std::vector<std::pair<double, Scenario>> rows;
    for (const auto& [sc, v] : res.mean_variance) rows.emplace_back(v, sc);
    std::sort(rows.begin(), rows.end());  // best scenario first
    for (const auto& [v, sc] : rows) {
      csv.field(std::string(to_string(sc))).field(v).field(static_cast<long long>(p.seed));
      csv.end_row();
    }
    res.manifest.add_output(path("summary.csv"));
  }

  res.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (write_outputs) res.manifest.write(path("manifest.json"));
  return res;
}

}  // namespace matnet
