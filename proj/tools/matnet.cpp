// Command-line front end: graph/config ingestion, analysis and design
// subcommands, CSV/plot-data emission and the end-to-end example pipeline.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>

#include "matnet/matnet.hpp"

namespace fs = std::filesystem;
using namespace matnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;

int thread_count() {
  if (const char* env = std::getenv("MATNET_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_report(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << body;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

WeightBox box_from_json(const nlohmann::json& j, int k) {
  return WeightBox::validated(detail::matrix_from_flat(j.at("w_min"), k, k, "w_min"),
                              detail::matrix_from_flat(j.at("w_max"), k, k, "w_max"));
}

WeightBox generated_box(double alpha_lo, double alpha_hi, int k, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0xb0c5);
  const Tolerances& tol = default_tolerances();
  for (int attempt = 0; attempt < tol.spd_max_attempts; ++attempt) {
    Matrix lo = random_spd_weight(alpha_lo, k, rng);
    Matrix hi = random_spd_weight(alpha_hi, k, rng);
    if (min_eig_sym(hi - lo) > 0.0) return WeightBox::validated(std::move(lo), std::move(hi));
  }
  throw GenerationFailed("weight box: no PSD-ordered draw within attempt budget");
}

// ---------------------------------------------------------------- h2 / bounds

struct H2Options {
  std::string graph_file;
  std::string noise = "special";
  std::string noise_file;
  double sigma_w = 1.0;
  double sigma_v = 1.0;
  std::string out;
  std::string csv;
};

void run_h2(const H2Options& opt) {
  const MatrixWeightedGraph g = load_graph(opt.graph_file);
  std::ostringstream rep;
  GramianResult res;
  std::optional<FactorBounds> suff;
  std::optional<FactorBounds> tight;

  if (opt.noise == "special" && opt.noise_file.empty()) {
    res = h2_closed_form(g, opt.sigma_w, opt.sigma_v);
    rep << "route: closed-form\n";
  } else {
    const NoiseModel nm = opt.noise_file.empty()
                              ? NoiseModel::special(opt.sigma_w, opt.sigma_v)
                              : load_noise(opt.noise_file, g);
    res = h2_general(g, nm);
    rep << "route: general\n";
    if (nm.kind == NoiseModel::Kind::General) {
      const auto [Om, Ga] = nm.factors(g);
      tight = tight_factors(Om, Ga, g);
      try {
        suff = sufficient_factors(Om, Ga, g);
      } catch (const OrderingViolated&) {
        // spectral-bound formulas cannot certify this instance; tight only
      }
    }
  }

  rep << "h2: " << fmt(res.h2) << "\n";
  rep << "residual: " << fmt(res.residual) << "\n";
  if (g.is_tree())
    rep << "tree_formula: " << fmt(h2_tree_formula(g, opt.sigma_w, opt.sigma_v)) << "\n";
  auto emit_bounds = [&](const char* name, const FactorBounds& b) {
    rep << name << ": alpha in [" << fmt(b.alpha_lo) << ", " << fmt(b.alpha_hi) << "], beta in ["
        << fmt(b.beta_lo) << ", " << fmt(b.beta_hi) << "], gap "
        << fmt(performance_gap(b, g, opt.sigma_w, opt.sigma_v)) << "\n";
  };
  if (tight) emit_bounds("bounds_tight", *tight);
  if (suff)
    emit_bounds("bounds_sufficient", *suff);
  else if (tight)
    rep << "bounds_sufficient: not certifiable (OrderingViolated)\n";
  write_report(opt.out, rep.str());

  if (!opt.csv.empty()) {
    CsvWriter csv(opt.csv);
    csv.header({"name", "value"});
    csv.field(std::string("h2")).field(res.h2);
    csv.end_row();
    csv.field(std::string("residual")).field(res.residual);
    csv.end_row();
    if (tight) {
      for (auto [name, val] : {std::pair<const char*, double>{"alpha_lo", tight->alpha_lo},
                               {"alpha_hi", tight->alpha_hi},
                               {"beta_lo", tight->beta_lo},
                               {"beta_hi", tight->beta_hi}}) {
        csv.field(std::string(name)).field(val);
        csv.end_row();
      }
    }
  }
}

// -------------------------------------------------------------------- design

struct DesignOptions {
  std::string graph_file;
  std::string mode = "weights";
  double h = 0.01;
  int r = 1;
  int max_iter = -1;
  double tol_rel = -1.0;
  double eps_min = 0.1;
  double eps_max = 100.0;
  std::string box_file;
  double alpha_lo = 0.05;
  double alpha_hi = 10.0;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

void run_design(const DesignOptions& opt) {
  MatrixWeightedGraph g = load_graph(opt.graph_file);
  fs::create_directories(opt.out_dir);
  auto path = [&](const std::string& name) { return (fs::path(opt.out_dir) / name).string(); };

  RunManifest manifest;
  manifest.command = "design:" + opt.mode;
  manifest.seed = opt.seed;
  manifest.config_digest = digest_hex(fnv1a64(opt.mode + "|" + fmt(opt.h) + "|" +
                                              std::to_string(opt.seed) + "|" + opt.graph_file));
  const auto t0 = std::chrono::steady_clock::now();

  if (opt.mode == "timescales" || opt.mode == "both") {
    const TimescaleBox box = TimescaleBox::validated(opt.eps_min, opt.eps_max, opt.h, opt.r);
    const Matrix eps = assign_timescales(g, box);
    g = g.with_timescales(eps);
    write_timescale_csv(g, eps, box, path("timescales.csv"));
    manifest.add_output(path("timescales.csv"));
  }
  if (opt.mode == "weights" || opt.mode == "both") {
    const WeightBox box =
        opt.box_file.empty()
            ? generated_box(opt.alpha_lo, opt.alpha_hi, g.substate_dim(), opt.seed)
            : box_from_json(detail::parse_file(opt.box_file), g.substate_dim());
    const DescentReport rep = optimize_weights(g, box, opt.h, opt.max_iter, opt.tol_rel);
    g = g.with_weights(rep.iterates.back());
    write_descent_csv(rep, path("weights_descent.csv"));
    manifest.add_output(path("weights_descent.csv"));
    std::cout << "iterations: " << rep.iterations << (rep.converged ? " (converged)" : "")
              << ", final cost " << fmt(rep.costs.back()) << "\n";
  }

  save_graph(g, path("graph_designed.json"));
  manifest.add_output(path("graph_designed.json"));
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.write(path("manifest.json"));
}

// --------------------------------------------------------------------- flock

struct FlockOptions {
  std::string config_file;
  std::string out_dir = ".";
  int seeds = 1;
  int decimate = 10;
};

void run_flock(const FlockOptions& opt) {
  const nlohmann::json j = detail::parse_file(opt.config_file);
  const auto t0 = std::chrono::steady_clock::now();

  MatrixWeightedGraph g = [&] {
    if (j.contains("graph")) return load_graph(j.at("graph").get<std::string>());
    if (j.contains("inline")) return graph_from_json(j.at("inline"));
    throw ParseError("flock config: need 'graph' (path) or 'inline' (object)");
  }();

  SimConfig cfg;
  cfg.dt = j.value("dt", 1e-3);
  cfg.t_end = j.value("t_end", 30.0);
  if (j.contains("gust")) {
    cfg.t_on = j.at("gust").at(0).get<double>();
    cfg.t_off = j.at("gust").at(1).get<double>();
  }
  cfg.sigma_w = j.value("sigma_w", 5.0);
  cfg.sigma_v = j.value("sigma_v", 5.0);
  cfg.seed = j.value("seed", 1ull);
  cfg.design_h = j.value("h", 0.01);
  const double eps_lo = j.contains("eps_box") ? j.at("eps_box").at(0).get<double>() : 0.1;
  const double eps_hi = j.contains("eps_box") ? j.at("eps_box").at(1).get<double>() : 100.0;
  cfg.ts_box = TimescaleBox::validated(eps_lo, eps_hi, cfg.design_h, j.value("r", 1));
  if (j.contains("weight_box")) {
    cfg.weight_box = box_from_json(j.at("weight_box"), g.substate_dim());
  } else {
    const double a_lo = j.contains("box_alphas") ? j.at("box_alphas").at(0).get<double>() : 0.05;
    const double a_hi = j.contains("box_alphas") ? j.at("box_alphas").at(1).get<double>() : 10.0;
    cfg.weight_box = generated_box(a_lo, a_hi, g.substate_dim(),
                                   j.value("box_seed", static_cast<std::uint64_t>(cfg.seed)));
  }
  if (!j.contains("formation") || j.at("formation").is_string()) {
    const double spacing = j.value("spacing", 1.0);
    for (const auto& pt : spiral_formation(g.node_count(), spacing)) {
      Vector d = Vector::Zero(g.substate_dim());
      d.head(2) = pt;
      cfg.formation.push_back(d);
    }
  } else {
    for (const auto& row : j.at("formation")) {
      Vector d(g.substate_dim());
      for (int l = 0; l < g.substate_dim(); ++l) d(l) = row.at(l).get<double>();
      cfg.formation.push_back(d);
    }
  }

  fs::create_directories(opt.out_dir);
  auto path = [&](const std::string& name) { return (fs::path(opt.out_dir) / name).string(); };
  RunManifest manifest;
  manifest.command = "flock";
  manifest.seed = cfg.seed;
  manifest.config_digest = digest_hex(file_digest(opt.config_file));
  manifest.parameters = {{"dt", cfg.dt},           {"t_end", cfg.t_end},
                         {"gust_on", cfg.t_on},    {"gust_off", cfg.t_off},
                         {"sigma_w", cfg.sigma_w}, {"sigma_v", cfg.sigma_v},
                         {"h", cfg.design_h},      {"r", cfg.ts_box.r},
                         {"seeds", opt.seeds},     {"decimate", opt.decimate}};

  // Traces for the base seed.
  const auto traces = run_scenarios(g, cfg);
  for (const auto& [sc, trace] : traces) {
    const std::string f = path(std::string("trace_") + to_string(sc) + ".csv");
    write_trace_csv(trace, g, f, opt.decimate);
    manifest.add_output(f);
  }

  // summary rows ordered best-first by mean variance
  CsvWriter summary(path("summary.csv"));
  if (opt.seeds <= 1) {
    summary.header({"scenario", "mean_post_gust_variance", "seed"});
    std::vector<std::pair<double, Scenario>> rows;
    for (const auto& [sc, trace] : traces)
      rows.emplace_back(mean_post_gust_variance(trace, cfg.t_on), sc);
    std::sort(rows.begin(), rows.end());
    for (const auto& [v, sc] : rows) {
      summary.field(std::string(to_string(sc))).field(v).field(static_cast<long long>(cfg.seed));
      summary.end_row();
    }
  } else {
    const auto batch = scenario_batch(g, cfg, opt.seeds, thread_count());
    summary.header({"scenario", "mean", "stderr", "seeds", "base_seed"});
    std::vector<std::tuple<double, double, Scenario>> rows;
    for (const auto& [sc, vals] : batch) {
      const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      const double se = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1.0) / vals.size()) : 0.0;
      rows.emplace_back(mean, se, sc);
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [mean, se, sc] : rows) {
      summary.field(std::string(to_string(sc)))
          .field(mean)
          .field(se)
          .field(opt.seeds)
          .field(static_cast<long long>(cfg.seed));
      summary.end_row();
    }
  }
  manifest.add_output(path("summary.csv"));
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.write(path("manifest.json"));
}

int classify(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ConfigInvalid*>(&e) ||
      dynamic_cast<const DuplicateEdge*>(&e) || dynamic_cast<const Disconnected*>(&e) ||
      dynamic_cast<const NonSPDWeight*>(&e) || dynamic_cast<const NonPositiveScale*>(&e) ||
      dynamic_cast<const NotATree*>(&e))
    return kExitParse;
  return kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis and H2-optimal design of matrix-weighted, time-scaled consensus networks"};
  app.require_subcommand(1);
  app.footer(
      "file schemas (JSON, 1-based node indices):\n"
      "  graph:  {\"n\": 3, \"k\": 2, \"edges\": [[1,2],[2,3]],\n"
      "           \"weights\": [[k*k row-major], ...],\n"
      "           \"timescales\": [[eps_i1..eps_ik], ...]}\n"
      "  noise:  {\"kind\": \"special\", \"sigma_w\": 1.0, \"sigma_v\": 1.0}\n"
      "       or {\"kind\": \"general\", \"omega\": [kn*kn], \"gamma\": [km*km]}\n"
      "  flock:  {\"graph\": \"g.json\", \"dt\": 1e-3, \"t_end\": 30, \"gust\": [10,20],\n"
      "           \"sigma_w\": 5, \"sigma_v\": 5, \"seed\": 1, \"formation\": \"spiral\",\n"
      "           \"h\": 0.01, \"r\": 1, \"eps_box\": [0.1,100], \"box_alphas\": [0.05,10]}\n"
      "trace CSV columns: time, entity_id, substate, value,\n"
      "  series in {position, velocity, edge, variance}\n"
      "environment: MATNET_THREADS caps batch parallelism");

  H2Options h2opt;
  auto* h2cmd = app.add_subcommand("h2", "H2 performance of a graph under a noise model");
  h2cmd->add_option("--graph", h2opt.graph_file, "graph JSON file")->required();
  h2cmd->add_option("--noise", h2opt.noise, "special|general")
      ->check(CLI::IsMember({"special", "general"}));
  h2cmd->add_option("--noise-file", h2opt.noise_file, "noise spec JSON (general covariances)");
  h2cmd->add_option("--sigma-w", h2opt.sigma_w, "process noise level");
  h2cmd->add_option("--sigma-v", h2opt.sigma_v, "measurement noise level");
  h2cmd->add_option("--out", h2opt.out, "report file (stdout if omitted)");
  h2cmd->add_option("--csv", h2opt.csv, "optional CSV output");

  H2Options bopt;
  auto* bcmd = app.add_subcommand("bounds", "factor bounds and worst-case H2 gap");
  bcmd->add_option("--graph", bopt.graph_file, "graph JSON file")->required();
  bcmd->add_option("--noise-file", bopt.noise_file, "noise spec JSON with true covariances")
      ->required();
  bcmd->add_option("--sigma-w", bopt.sigma_w, "proxy process noise level");
  bcmd->add_option("--sigma-v", bopt.sigma_v, "proxy measurement noise level");
  bcmd->add_option("--out", bopt.out, "report file (stdout if omitted)");

  DesignOptions dopt;
  auto* wcmd = app.add_subcommand("optimize-weights", "projected gradient descent on edge weights");
  wcmd->add_option("--graph", dopt.graph_file, "graph JSON file")->required();
  wcmd->add_option("--penalty", dopt.h, "penalty weight h");
  wcmd->add_option("--max-iter", dopt.max_iter, "iteration cap");
  wcmd->add_option("--tol", dopt.tol_rel, "relative cost-change stop");
  wcmd->add_option("--box-file", dopt.box_file, "weight box JSON {w_min, w_max}");
  wcmd->add_option("--alpha-l", dopt.alpha_lo, "lower box generator scale");
  wcmd->add_option("--alpha-u", dopt.alpha_hi, "upper box generator scale");
  wcmd->add_option("--seed", dopt.seed, "box generator seed");
  wcmd->add_option("--out", dopt.out_dir, "output directory");

  DesignOptions topt;
  topt.mode = "timescales";
  auto* tcmd = app.add_subcommand("assign-timescales", "analytic optimal time-scale assignment");
  tcmd->add_option("--graph", topt.graph_file, "graph JSON file")->required();
  tcmd->add_option("--penalty", topt.h, "penalty weight h");
  tcmd->add_option("--exponent", topt.r, "penalty exponent r");
  tcmd->add_option("--eps-min", topt.eps_min, "lower box bound");
  tcmd->add_option("--eps-max", topt.eps_max, "upper box bound");
  tcmd->add_option("--out", topt.out_dir, "output directory");

  DesignOptions bothopt;
  bothopt.mode = "both";
  auto* bothcmd = app.add_subcommand("design", "timescales then weights");
  bothcmd->add_option("--graph", bothopt.graph_file, "graph JSON file")->required();
  bothcmd->add_option("--penalty", bothopt.h, "penalty weight h");
  bothcmd->add_option("--exponent", bothopt.r, "penalty exponent r");
  bothcmd->add_option("--eps-min", bothopt.eps_min, "lower box bound");
  bothcmd->add_option("--eps-max", bothopt.eps_max, "upper box bound");
  bothcmd->add_option("--box-file", bothopt.box_file, "weight box JSON");
  bothcmd->add_option("--alpha-l", bothopt.alpha_lo, "lower box generator scale");
  bothcmd->add_option("--alpha-u", bothopt.alpha_hi, "upper box generator scale");
  bothcmd->add_option("--seed", bothopt.seed, "box generator seed");
  bothcmd->add_option("--out", bothopt.out_dir, "output directory");

  struct {
    std::string graph_file;
    double sigma_w = 1.0, sigma_v = 1.0;
    std::string which = "aggregate";
  } diopt;
  auto* dicmd = app.add_subcommand("di-h2", "double-integrator edge-consensus H2");
  dicmd->add_option("--graph", diopt.graph_file, "graph JSON file")->required();
  dicmd->add_option("--sigma-w", diopt.sigma_w, "process noise level");
  dicmd->add_option("--sigma-v", diopt.sigma_v, "measurement noise level");
  dicmd->add_option("--which", diopt.which, "position|velocity|aggregate")
      ->check(CLI::IsMember({"position", "velocity", "aggregate"}));

  FlockOptions fopt;
  auto* fcmd = app.add_subcommand("flock", "four-scenario gust simulation");
  fcmd->add_option("--config", fopt.config_file, "simulation config JSON")->required();
  fcmd->add_option("--out", fopt.out_dir, "output directory");
  fcmd->add_option("--seeds", fopt.seeds, "replicates for batch statistics");
  fcmd->add_option("--decimate", fopt.decimate, "trace CSV decimation stride");

  struct {
    std::string out_dir = "paper_example_out";
    std::uint64_t seed = 1;
    int decimate = 10;
  } popt;
  auto* pcmd = app.add_subcommand("paper-example", "end-to-end design + gust pipeline");
  pcmd->add_option("--out", popt.out_dir, "output directory");
  pcmd->add_option("--seed", popt.seed, "pipeline seed");
  pcmd->add_option("--decimate", popt.decimate, "trace CSV decimation stride");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (h2cmd->parsed()) {
      run_h2(h2opt);
    } else if (bcmd->parsed()) {
      bopt.noise = "general";
      run_h2(bopt);
    } else if (wcmd->parsed()) {
      run_design(dopt);
    } else if (tcmd->parsed()) {
      run_design(topt);
    } else if (bothcmd->parsed()) {
      run_design(bothopt);
    } else if (dicmd->parsed()) {
      const MatrixWeightedGraph g = load_graph(diopt.graph_file);
      const H2Component which = diopt.which == "position"   ? H2Component::Position
                                : diopt.which == "velocity" ? H2Component::Velocity
                                                            : H2Component::Aggregate;
      std::cout << "di_h2_" << diopt.which << ": "
                << fmt(di_h2(g, diopt.sigma_w, diopt.sigma_v, which)) << "\n";
    } else if (fcmd->parsed()) {
      run_flock(fopt);
    } else if (pcmd->parsed()) {
      PaperExampleParams params;
      params.seed = popt.seed;
      params.decimate = popt.decimate;
      const auto res = run_paper_example(popt.out_dir, params);
      for (const auto& [sc, v] : res.mean_variance)
        std::cout << to_string(sc) << ": mean post-gust variance " << fmt(v) << "\n";
      std::cout << "outputs in " << popt.out_dir << " (manifest.json has digests)\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
