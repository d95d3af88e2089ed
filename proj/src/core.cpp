#include <cstring>
#include <limits>

#include "pyramid/errors.hpp"
#include "pyramid/hash_family.hpp"
#include "pyramid/rng.hpp"
#include "pyramid/slot.hpp"

namespace pyramid {

Payload payload_from_u64(std::uint64_t value) {
  Payload p{};
  std::uint64_t word = value;
  for (std::size_t off = 0; off < kPayloadBytes; off += 8) {
    std::memcpy(p.data() + off, &word, 8);
    word = mix64(word + 0x9e3779b97f4a7c15ULL);
  }
  return p;
}

std::uint64_t payload_to_u64(const Payload& payload) {
  std::uint64_t v = 0;
  std::memcpy(&v, payload.data(), 8);
  return v;
}

std::uint64_t HashFamily::prf(std::uint32_t level, std::uint32_t table,
                              std::uint32_t key) const {
  std::uint64_t h = mix64(seed_ ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ epoch_);
  h = mix64(h ^ ((static_cast<std::uint64_t>(level) << 32) | table));
  h = mix64(h ^ (0x13198a2e03707344ULL + key));
  return h;
}

std::uint32_t hash_bucket(const HashFamily& fam, std::uint32_t level,
                          std::uint32_t table_index, std::uint32_t key,
                          std::uint32_t n) {
  if (n == 0) throw InvalidParameter("hash_bucket: n must be >= 1");
  const std::uint64_t h = fam.prf(level, table_index, key);
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(h) * n) >> 64);
}

HashFamily fresh_epoch(const HashFamily& fam) {
  if (fam.epoch() == std::numeric_limits<std::uint64_t>::max()) {
    throw CounterExhausted("hash family epoch counter exhausted");
  }
  return HashFamily(fam.seed(), fam.epoch() + 1);
}

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  return Rng(seq);
}

std::uint32_t random_bucket(Rng& rng, std::uint32_t n) {
  if (!is_power_of_two(n)) {
    throw InvalidParameter("random_bucket: n must be a power of two");
  }
  return static_cast<std::uint32_t>(rng.next() & (n - 1));
}

}  // namespace pyramid
