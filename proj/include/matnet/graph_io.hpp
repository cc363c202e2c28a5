#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "matnet/graph.hpp"
#include "matnet/h2.hpp"

namespace matnet {

namespace detail {

inline nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

inline Matrix matrix_from_flat(const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols,
                               const std::string& what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw ParseError(what + ": expected a flat row-major array of " +
                     std::to_string(rows * cols) + " numbers");
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& v = arr[i * cols + j];
      if (!v.is_number()) throw ParseError(what + ": non-numeric entry");
      M(i, j) = v.get<double>();
    }
  return M;
}

inline nlohmann::json matrix_to_flat(const Matrix& M) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  return arr;
}

}  // namespace detail

/// Graph file schema (node indices 1-based in files):
/// { "n": 3, "k": 2,
///   "edges": [[1,2], [2,3]],
///   "weights": [[k*k row-major numbers], ...],
///   "timescales": [[eps_i1, ..., eps_ik], ...] }
inline MatrixWeightedGraph graph_from_json(const nlohmann::json& j,
                                           const Tolerances& tol = default_tolerances()) {
  try {
    const int n = j.at("n").get<int>();
    const int k = j.at("k").get<int>();

    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ParseError("edges: each entry must be a pair [i, j]");
      edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
    }

    std::vector<Matrix> weights;
    const auto& ws = j.at("weights");
    for (std::size_t l = 0; l < ws.size(); ++l)
      weights.push_back(
          detail::matrix_from_flat(ws[l], k, k, "weights[" + std::to_string(l + 1) + "] (edge " +
                                                    std::to_string(l + 1) + ")"));

    Matrix timescales(n, k);
    const auto& ts = j.at("timescales");
    if (!ts.is_array() || static_cast<int>(ts.size()) != n)
      throw ParseError("timescales: one row per node required");
    for (int i = 0; i < n; ++i) {
      if (!ts[i].is_array() || static_cast<int>(ts[i].size()) != k)
        throw ParseError("timescales: row " + std::to_string(i + 1) + " must have k entries");
      for (int l = 0; l < k; ++l) timescales(i, l) = ts[i][l].get<double>();
    }
    return build_graph(n, k, std::move(edges), std::move(weights), std::move(timescales), tol);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph: ") + e.what());
  }
}

inline MatrixWeightedGraph load_graph(const std::string& path,
                                      const Tolerances& tol = default_tolerances()) {
  return graph_from_json(detail::parse_file(path), tol);
}

inline nlohmann::json graph_to_json(const MatrixWeightedGraph& g) {
  nlohmann::json j;
  j["n"] = g.node_count();
  j["k"] = g.substate_dim();
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a + 1, b + 1});
  j["edges"] = edges;
  nlohmann::json weights = nlohmann::json::array();
  for (const Matrix& W : g.weights()) weights.push_back(detail::matrix_to_flat(W));
  j["weights"] = weights;
  nlohmann::json ts = nlohmann::json::array();
  for (int i = 0; i < g.node_count(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int l = 0; l < g.substate_dim(); ++l) row.push_back(g.timescales()(i, l));
    ts.push_back(row);
  }
  j["timescales"] = ts;
  return j;
}

inline void save_graph(const MatrixWeightedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << graph_to_json(g).dump(2) << "\n";
}

/// Noise spec schema:
/// { "kind": "special", "sigma_w": 1.0, "sigma_v": 1.0 }  or
/// { "kind": "general", "omega": [kn*kn row-major], "gamma": [km*km row-major] }
inline NoiseModel load_noise(const std::string& path, const MatrixWeightedGraph& g,
                             const Tolerances& tol = default_tolerances()) {
  const nlohmann::json j = detail::parse_file(path);
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "special")
      return NoiseModel::special(j.at("sigma_w").get<double>(), j.at("sigma_v").get<double>());
    if (kind == "general") {
      const Eigen::Index kn = static_cast<Eigen::Index>(g.node_count()) * g.substate_dim();
      const Eigen::Index km = static_cast<Eigen::Index>(g.edge_count()) * g.substate_dim();
      return NoiseModel::general(detail::matrix_from_flat(j.at("omega"), kn, kn, "omega"),
                                 detail::matrix_from_flat(j.at("gamma"), km, km, "gamma"), tol);
    }
    throw ParseError("noise: kind must be 'special' or 'general'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("noise: ") + e.what());
  }
}

}  // namespace matnet
