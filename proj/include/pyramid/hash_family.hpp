#pragma once

#include <cstdint>

namespace pyramid {

/// 64-bit finalizer (splitmix64 variant). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Keyed pseudo-random function family. A (seed, epoch) pair selects one
/// family; (level, table) selects a member; each rebuild moves to a fresh
/// epoch so a level never reuses the mapping of an earlier build.
class HashFamily {
 public:
  HashFamily() = default;
  explicit HashFamily(std::uint64_t seed, std::uint64_t epoch = 0)
      : seed_(seed), epoch_(epoch) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t epoch() const { return epoch_; }

  /// Raw 64-bit PRF output.
  std::uint64_t prf(std::uint32_t level, std::uint32_t table,
                    std::uint32_t key) const;

  friend bool operator==(const HashFamily&, const HashFamily&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t epoch_ = 0;
};

/// Bucket index in [0, n) for `key` under member (level, table_index).
/// Throws InvalidParameter when n == 0.
std::uint32_t hash_bucket(const HashFamily& fam, std::uint32_t level,
                          std::uint32_t table_index, std::uint32_t key,
                          std::uint32_t n);

/// Same family with epoch + 1. Throws CounterExhausted on wrap.
HashFamily fresh_epoch(const HashFamily& fam);

}  // namespace pyramid
