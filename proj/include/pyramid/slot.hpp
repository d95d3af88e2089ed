#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "pyramid/errors.hpp"

#ifndef PYRAMID_PAYLOAD_BYTES
#define PYRAMID_PAYLOAD_BYTES 56
#endif

namespace pyramid {

inline constexpr std::size_t kPayloadBytes = PYRAMID_PAYLOAD_BYTES;
static_assert(kPayloadBytes % 8 == 0, "payload must be a multiple of 8 bytes");

/// Key stored in Empty and Dummy slots. Real keys live in [0, kMaxRealKey].
inline constexpr std::uint32_t kSentinelKey = 0xFFFFFFFFu;
inline constexpr std::uint32_t kMaxRealKey = 0xFFFFFFFEu;

using Payload = std::array<std::uint8_t, kPayloadBytes>;

enum class SlotState : std::uint8_t { kEmpty = 0, kDummy = 1, kReal = 2 };

/// One storage cell. With the default 56-byte payload a slot is exactly one
/// 64-byte cache line: 4-byte key, 4 bytes of state/tag, 56 bytes of data.
///
/// `tag` is the routing flag: true while a real element is still pending or
/// correctly routed, false once it has been spilled. Empty and dummy slots
/// always carry tag = false, flags = 0 and the sentinel key.
///
/// A real slot with kAbsentMarker set records that its key was read while
/// absent. It travels through the levels like an element so that a repeated
/// read of the same absent key is answered from a higher level.
struct alignas(8) Slot {
  static constexpr std::uint16_t kAbsentMarker = 1;

  std::uint32_t key = kSentinelKey;
  SlotState state = SlotState::kEmpty;
  std::uint8_t tag = 0;
  std::uint16_t flags = 0;
  Payload payload{};

  static Slot empty() { return Slot{}; }

  static Slot dummy() {
    Slot s;
    s.state = SlotState::kDummy;
    return s;
  }

  static Slot real(std::uint32_t key, const Payload& payload, bool tag = true) {
    if (key > kMaxRealKey) {
      throw InvalidParameter("real keys must be below the sentinel key");
    }
    Slot s;
    s.key = key;
    s.state = SlotState::kReal;
    s.tag = tag ? 1 : 0;
    s.payload = payload;
    return s;
  }

  static Slot absent_marker(std::uint32_t key) {
    Slot s = real(key, Payload{});
    s.flags = kAbsentMarker;
    return s;
  }

  bool is_real() const { return state == SlotState::kReal; }
  /// Real slot that holds an element (not an absent-key marker).
  bool holds_element() const { return is_real() & ((flags & kAbsentMarker) == 0); }
  bool is_dummy() const { return state == SlotState::kDummy; }
  bool is_empty() const { return state == SlotState::kEmpty; }

  /// Checks the per-state field invariants.
  bool well_formed() const {
    switch (state) {
      case SlotState::kEmpty:
      case SlotState::kDummy:
        return key == kSentinelKey && tag == 0 && flags == 0;
      case SlotState::kReal:
        return key <= kMaxRealKey && tag <= 1 && flags <= kAbsentMarker;
    }
    return false;
  }

  friend bool operator==(const Slot&, const Slot&) = default;
};

static_assert(std::is_trivially_copyable_v<Slot>);
static_assert(sizeof(Slot) == 8 + kPayloadBytes);
static_assert(sizeof(Slot) % 8 == 0);

/// State transitions allowed inside in-place structural operations.
/// Staying in the same state is always allowed.
constexpr bool transition_allowed(SlotState from, SlotState to) {
  if (from == to) return true;
  switch (from) {
    case SlotState::kEmpty:
      return to == SlotState::kReal;
    case SlotState::kDummy:
      return to == SlotState::kReal;
    case SlotState::kReal:
      return to == SlotState::kDummy || to == SlotState::kEmpty;
  }
  return false;
}

/// Payload filled with a repeating pattern derived from `value`; used by
/// workloads and tests that need distinguishable payloads.
Payload payload_from_u64(std::uint64_t value);
std::uint64_t payload_to_u64(const Payload& payload);

inline constexpr bool is_power_of_two(std::uint64_t x) {
  return x != 0 && (x & (x - 1)) == 0;
}

/// A table of n buckets with c slots each, stored contiguously.
template <class SlotT>
class BasicTable {
 public:
  BasicTable() = default;

  BasicTable(std::uint32_t n, std::uint32_t c, const SlotT& fill = SlotT{})
      : n_(n), c_(c) {
    if (!is_power_of_two(n)) {
      throw InvalidParameter("bucket count must be a power of two");
    }
    if (c == 0) throw InvalidParameter("bucket size must be positive");
    slots_.assign(static_cast<std::size_t>(n) * c, fill);
  }

  std::uint32_t buckets() const { return n_; }
  std::uint32_t bucket_size() const { return c_; }

  std::span<SlotT> bucket(std::uint32_t b) {
    return {slots_.data() + static_cast<std::size_t>(b) * c_, c_};
  }
  std::span<const SlotT> bucket(std::uint32_t b) const {
    return {slots_.data() + static_cast<std::size_t>(b) * c_, c_};
  }

  std::span<SlotT> slots() { return slots_; }
  std::span<const SlotT> slots() const { return slots_; }

  friend bool operator==(const BasicTable&, const BasicTable&) = default;

 private:
  std::uint32_t n_ = 0;
  std::uint32_t c_ = 0;
  std::vector<SlotT> slots_;
};

using Table = BasicTable<Slot>;

}  // namespace pyramid
