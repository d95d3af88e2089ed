#include "pyramid/oprim.hpp"

#include <bit>

namespace pyramid::oprim {

std::vector<Comparator> batcher_schedule(std::size_t m) {
  std::vector<Comparator> out;
  if (m < 2) return out;
  const std::size_t size = std::bit_ceil(m);
  // Knuth 5.2.2M, iterative form.
  for (std::size_t p = 1; p < size; p <<= 1) {
    for (std::size_t k = p; k >= 1; k >>= 1) {
      for (std::size_t j = k % p; j + k < size; j += 2 * k) {
        const std::size_t lim = std::min(k, size - j - k);
        for (std::size_t i = 0; i < lim; ++i) {
          const std::size_t lo = i + j;
          const std::size_t hi = i + j + k;
          if (lo / (2 * p) != hi / (2 * p)) continue;
          if (hi >= m) continue;
          out.emplace_back(static_cast<std::uint32_t>(lo),
                           static_cast<std::uint32_t>(hi));
        }
      }
    }
  }
  return out;
}

std::size_t batcher_sort(std::span<SortItem> items) {
  const auto schedule = batcher_schedule(items.size());
  for (const auto& [i, j] : schedule) {
    cond_swap(sort_greater(items[i], items[j]), items[i], items[j]);
  }
  return schedule.size();
}

}  // namespace pyramid::oprim
