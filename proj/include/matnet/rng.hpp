#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace matnet {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic random stream. The engine is mt19937_64 (bit-exact per the
/// standard) and the uniform/gaussian transforms are pinned here instead of
/// relying on implementation-defined std distributions, so identical seeds
/// give identical draws on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed, 0)) {}

  /// Independent substream identified by (seed, stream_id).
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(seed, stream_id);
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no rejection, stream-stable).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, bound) by rejection-free scaling (bound << 2^64).
  std::uint64_t below(std::uint64_t bound) { return gen_() % bound; }

 private:
  Rng(std::uint64_t seed, std::uint64_t stream_id) : gen_(mix(seed, stream_id)) {}

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t s = seed ^ (0xa0761d6478bd642fULL + stream_id * 0xe7037ed1a0b428dbULL);
    return detail::splitmix64(s);
  }

  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace matnet
