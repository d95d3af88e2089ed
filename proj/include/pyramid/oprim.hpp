#pragma once

// Branchless building blocks. Every routine here touches the same memory in
// the same order regardless of the flag or the data.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

namespace pyramid::oprim {

template <std::unsigned_integral T>
constexpr T mask_of(bool flag) {
  return static_cast<T>(T{0} - static_cast<T>(flag));
}

template <std::unsigned_integral T>
constexpr T cond_select(bool flag, T a, T b) {
  const T m = mask_of<T>(flag);
  return static_cast<T>((a & m) | (b & static_cast<T>(~m)));
}

template <std::unsigned_integral T>
constexpr void cond_swap(bool flag, T& a, T& b) {
  const T d = static_cast<T>((a ^ b) & mask_of<T>(flag));
  a = static_cast<T>(a ^ d);
  b = static_cast<T>(b ^ d);
}

/// Word-wise select/swap for trivially copyable records whose size is a
/// multiple of 8 bytes (slots, routing slots).
template <class T>
concept WordRecord = std::is_trivially_copyable_v<T> && !std::integral<T> &&
                     sizeof(T) % 8 == 0;

template <WordRecord T>
inline T cond_select(bool flag, const T& a, const T& b) {
  constexpr std::size_t kWords = sizeof(T) / 8;
  std::uint64_t wa[kWords];
  std::uint64_t wb[kWords];
  std::memcpy(wa, &a, sizeof(T));
  std::memcpy(wb, &b, sizeof(T));
  const std::uint64_t m = mask_of<std::uint64_t>(flag);
  for (std::size_t i = 0; i < kWords; ++i) wa[i] = (wa[i] & m) | (wb[i] & ~m);
  T out;
  std::memcpy(&out, wa, sizeof(T));
  return out;
}

/// dst = flag ? src : dst, in place.
template <WordRecord T>
inline void cond_assign(bool flag, T& dst, const T& src) {
  constexpr std::size_t kWords = sizeof(T) / 8;
  std::uint64_t wd[kWords];
  std::uint64_t ws[kWords];
  std::memcpy(wd, &dst, sizeof(T));
  std::memcpy(ws, &src, sizeof(T));
  const std::uint64_t m = mask_of<std::uint64_t>(flag);
  for (std::size_t i = 0; i < kWords; ++i) wd[i] ^= (wd[i] ^ ws[i]) & m;
  std::memcpy(&dst, wd, sizeof(T));
}

template <WordRecord T>
inline void cond_swap(bool flag, T& a, T& b) {
  constexpr std::size_t kWords = sizeof(T) / 8;
  std::uint64_t wa[kWords];
  std::uint64_t wb[kWords];
  std::memcpy(wa, &a, sizeof(T));
  std::memcpy(wb, &b, sizeof(T));
  const std::uint64_t m = mask_of<std::uint64_t>(flag);
  for (std::size_t i = 0; i < kWords; ++i) {
    const std::uint64_t d = (wa[i] ^ wb[i]) & m;
    wa[i] ^= d;
    wb[i] ^= d;
  }
  std::memcpy(&a, wa, sizeof(T));
  std::memcpy(&b, wb, sizeof(T));
}

/// Sort record for bucket repartitioning. Ordered by (cls, tiebreak).
/// cls: 0 = left-bound, 1 = middle (spilled, empty, dummy), 2 = right-bound.
struct alignas(8) SortItem {
  std::uint64_t tiebreak = 0;
  std::uint32_t payload_ref = 0;
  std::uint32_t cls = 1;

  friend bool operator==(const SortItem&, const SortItem&) = default;
};

inline bool sort_greater(const SortItem& a, const SortItem& b) {
  const unsigned __int128 ka =
      (static_cast<unsigned __int128>(a.cls) << 64) | a.tiebreak;
  const unsigned __int128 kb =
      (static_cast<unsigned __int128>(b.cls) << 64) | b.tiebreak;
  return ka > kb;
}

using Comparator = std::pair<std::uint32_t, std::uint32_t>;

/// Compare-exchange schedule of Batcher's odd-even mergesort for m items.
/// The network is generated for the next power of two; comparators that
/// touch a padded position are dropped (padded positions act as +infinity
/// and never move). Depends only on m.
std::vector<Comparator> batcher_schedule(std::size_t m);

/// Sorts items by (cls, tiebreak) in place with the fixed schedule for
/// items.size(). Returns the number of compare-exchanges executed.
std::size_t batcher_sort(std::span<SortItem> items);

/// Sorts `keys` and applies every exchange to `records` in lockstep.
template <WordRecord T>
std::size_t batcher_sort_lockstep(std::span<SortItem> keys,
                                  std::span<T> records,
                                  const std::vector<Comparator>& schedule) {
  for (const auto& [i, j] : schedule) {
    const bool swap = sort_greater(keys[i], keys[j]);
    cond_swap(swap, keys[i], keys[j]);
    cond_swap(swap, records[i], records[j]);
  }
  return schedule.size();
}

}  // namespace pyramid::oprim
