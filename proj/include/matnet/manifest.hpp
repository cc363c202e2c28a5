#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "matnet/errors.hpp"

namespace matnet {

inline constexpr const char* kVersion = "0.1.0";

/// FNV-1a 64-bit digest of a byte string.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string digest_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "' for digesting");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

/// Provenance record written next to every batch of outputs: the command,
/// a digest of the effective configuration, the seed, the library version,
/// per-output digests and the wall time.
struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  nlohmann::json parameters = nlohmann::json::object();  // effective run parameters
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, digest)
  double wall_seconds = 0.0;

  void add_output(const std::string& path) {
    outputs.emplace_back(path, digest_hex(file_digest(path)));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_digest"] = config_digest;
    j["seed"] = seed;
    j["version"] = version;
    j["parameters"] = parameters;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [path, digest] : outputs) outs.push_back({{"path", path}, {"digest", digest}});
    j["outputs"] = outs;
    j["wall_seconds"] = wall_seconds;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << to_json().dump(2) << "\n";
  }
};

}  // namespace matnet
