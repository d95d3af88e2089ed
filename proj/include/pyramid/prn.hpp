#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pyramid/oprim.hpp"
#include "pyramid/rng.hpp"
#include "pyramid/slot.hpp"
#include "pyramid/trace.hpp"

namespace pyramid::prn {

/// Slot plus its cached destination bucket. The destination is computed once
/// on entry to the network (when stage 1 first reads the bucket) and never
/// changes while routing.
struct RoutingSlot {
  Slot slot;
  std::uint32_t dest = 0;
  std::uint32_t reserved = 0;

  friend bool operator==(const RoutingSlot&, const RoutingSlot&) = default;
};

static_assert(sizeof(RoutingSlot) % 8 == 0);

using RoutingTable = BasicTable<RoutingSlot>;

struct RouteStats {
  std::uint64_t repartitions = 0;
  /// Tag true->false transitions per stage; index 0 is stage 1.
  std::vector<std::uint64_t> spills_per_stage;

  std::uint64_t total_spills() const;
};

/// Bucket pairs re-partitioned at `stage` (1-based): indices that differ
/// only in bit stage-1, in ascending order of the lower index.
std::vector<std::pair<std::uint32_t, std::uint32_t>> stage_pairs(
    std::uint32_t n, unsigned stage);

/// Re-partitions two buckets on bit `bit_position` (0-based) of the
/// destination. Live elements (real, tag true) with bit 0 go to `a`, bit 1
/// to `b`; when more than c compete for one side, the excess is chosen
/// uniformly at random and retagged false. Everything else fills the
/// remaining space in scan order. Returns the number of newly spilled slots.
std::uint32_t repartition(std::span<RoutingSlot> a, std::span<RoutingSlot> b,
                          unsigned bit_position, Rng& rng);

struct RouteHooks {
  /// Called after every stage with the full table.
  std::function<void(unsigned stage, const RoutingTable&)> after_stage;
  /// Called for every pair of the final stage after it is re-partitioned and
  /// before it is written back, i.e. while both buckets are still in private
  /// memory. The hook may modify the buckets.
  std::function<void(std::uint32_t a_index, std::uint32_t b_index,
                     std::span<RoutingSlot> a, std::span<RoutingSlot> b)>
      final_pair;
};

/// Runs all log2(n) stages over `table`. Each re-partition records one
/// read-modify-write on both buckets of the pair in `region`.
/// Throws InvalidParameter when the bucket count is not a power of two.
RouteStats route(RoutingTable& table, Rng& rng, TraceRecorder* recorder,
                 Region region, const RouteHooks* hooks = nullptr);

}  // namespace pyramid::prn
