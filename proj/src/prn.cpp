#include "pyramid/prn.hpp"

#include <bit>
#include <numeric>

#include "pyramid/errors.hpp"

namespace pyramid::prn {

namespace {

using oprim::Comparator;
using oprim::SortItem;

class Repartitioner {
 public:
  explicit Repartitioner(std::uint32_t c)
      : c_(c),
        schedule_(oprim::batcher_schedule(2 * static_cast<std::size_t>(c))),
        keys_(2 * c),
        buf_(2 * c) {}

  std::uint32_t run(std::span<RoutingSlot> a, std::span<RoutingSlot> b,
                    unsigned bit, Rng& rng) {
    const std::uint32_t m = 2 * c_;
    for (std::uint32_t i = 0; i < c_; ++i) {
      buf_[i] = a[i];
      buf_[c_ + i] = b[i];
    }
    for (std::uint32_t i = 0; i < m; ++i) {
      const RoutingSlot& rs = buf_[i];
      const bool live = rs.slot.is_real() & (rs.slot.tag != 0);
      const std::uint32_t side = (rs.dest >> bit) & 1u;
      keys_[i].cls = oprim::cond_select<std::uint32_t>(live, side * 2, 1);
      keys_[i].tiebreak = oprim::cond_select<std::uint64_t>(live, rng.next(), i);
      keys_[i].payload_ref = i;
    }
    oprim::batcher_sort_lockstep<RoutingSlot>(keys_, buf_, schedule_);
    std::uint32_t spilled = 0;
    for (std::uint32_t p = 0; p < m; ++p) {
      const bool left_half = p < c_;
      const bool spill = (left_half & (keys_[p].cls == 2)) |
                         (!left_half & (keys_[p].cls == 0));
      buf_[p].slot.tag = oprim::cond_select<std::uint8_t>(spill, 0, buf_[p].slot.tag);
      spilled += spill;
    }
    return spilled;
  }

  void write_back(std::span<RoutingSlot> a, std::span<RoutingSlot> b) const {
    for (std::uint32_t i = 0; i < c_; ++i) {
      a[i] = buf_[i];
      b[i] = buf_[c_ + i];
    }
  }

  std::span<RoutingSlot> left() { return {buf_.data(), c_}; }
  std::span<RoutingSlot> right() { return {buf_.data() + c_, c_}; }

 private:
  std::uint32_t c_;
  std::vector<Comparator> schedule_;
  std::vector<SortItem> keys_;
  std::vector<RoutingSlot> buf_;
};

}  // namespace

std::uint64_t RouteStats::total_spills() const {
  return std::accumulate(spills_per_stage.begin(), spills_per_stage.end(),
                         std::uint64_t{0});
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> stage_pairs(
    std::uint32_t n, unsigned stage) {
  if (!is_power_of_two(n)) {
    throw InvalidParameter("routing network needs a power-of-two bucket count");
  }
  const unsigned stages = static_cast<unsigned>(std::countr_zero(n));
  if (stage < 1 || stage > stages) {
    throw InvalidParameter("stage out of range");
  }
  const std::uint32_t bit = 1u << (stage - 1);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(n / 2);
  for (std::uint32_t lo = 0; lo < n; ++lo) {
    if ((lo & bit) == 0) out.emplace_back(lo, lo | bit);
  }
  return out;
}

std::uint32_t repartition(std::span<RoutingSlot> a, std::span<RoutingSlot> b,
                          unsigned bit_position, Rng& rng) {
  if (a.size() != b.size() || a.empty()) {
    throw InvalidParameter("repartition needs two buckets of equal size");
  }
  Repartitioner r(static_cast<std::uint32_t>(a.size()));
  const std::uint32_t spilled = r.run(a, b, bit_position, rng);
  r.write_back(a, b);
  return spilled;
}

RouteStats route(RoutingTable& table, Rng& rng, TraceRecorder* recorder,
                 Region region, const RouteHooks* hooks) {
  const std::uint32_t n = table.buckets();
  if (!is_power_of_two(n)) {
    throw InvalidParameter("routing network needs a power-of-two bucket count");
  }
  const unsigned stages = static_cast<unsigned>(std::countr_zero(n));
  RouteStats stats;
  stats.spills_per_stage.assign(stages, 0);
  Repartitioner part(table.bucket_size());
  for (unsigned stage = 1; stage <= stages; ++stage) {
    const std::uint32_t bit = 1u << (stage - 1);
    const bool final_stage = stage == stages;
    for (std::uint32_t lo = 0; lo < n; ++lo) {
      if (lo & bit) continue;
      const std::uint32_t hi = lo | bit;
      note(recorder, region, lo, AccessOp::kReadWrite);
      note(recorder, region, hi, AccessOp::kReadWrite);
      auto a = table.bucket(lo);
      auto b = table.bucket(hi);
      stats.spills_per_stage[stage - 1] += part.run(a, b, stage - 1, rng);
      if (final_stage && hooks != nullptr && hooks->final_pair) {
        hooks->final_pair(lo, hi, part.left(), part.right());
      }
      part.write_back(a, b);
      ++stats.repartitions;
    }
    if (hooks != nullptr && hooks->after_stage) hooks->after_stage(stage, table);
  }
  return stats;
}

}  // namespace pyramid::prn
