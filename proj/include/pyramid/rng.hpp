#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace pyramid {

/// Deterministic seeded stream. Sub-streams for parallel trials are derived
/// from (seed, index) through std::seed_seq, so each trial gets its own
/// engine state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  /// Value in [0, n) from exactly one draw (multiply-shift reduction).
  std::uint64_t uniform(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  /// Double in [0, 1) from one draw.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  explicit Rng(std::seed_seq& seq) : engine_(seq) {}
  std::mt19937_64 engine_;
};

/// Uniform bucket index in [0, n) for power-of-two n; one draw per call.
/// Throws InvalidParameter otherwise.
std::uint32_t random_bucket(Rng& rng, std::uint32_t n);

}  // namespace pyramid
