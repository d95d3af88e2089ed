#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pyramid/hash_family.hpp"
#include "pyramid/rng.hpp"
#include "pyramid/slot.hpp"
#include "pyramid/trace.hpp"
#include "pyramid/zht.hpp"

namespace pyramid::ozht {

enum class FailureReason : std::uint8_t {
  kNone = 0,
  kThrowOverflow = 1,
  kFinalPhaseSpill = 2,
};

std::string_view to_string(FailureReason r);

struct BuildReport {
  bool success = true;
  /// Real slots of H_i left tag=false by the routing of phase i.
  std::vector<std::uint64_t> spills_after_phase;
  /// Real slots per table once the build finished.
  std::vector<std::uint64_t> occupancy_per_table;
  /// Real elements that were placed into table j at any point (initial
  /// throw plus re-throws).
  std::vector<std::uint64_t> arrivals_per_table;
  /// Real elements that found no slot during a throw or re-throw.
  std::uint64_t lost = 0;
  FailureReason failure_reason = FailureReason::kNone;
};

struct BuildResult {
  Zht zht;
  BuildReport report;
};

/// Builds a ZHT obliviously from `elems` (real and dummy slots). The access
/// schedule depends only on (|elems|, n, k, c); a failure is reported in the
/// BuildReport after the full schedule has run.
/// Throws InvalidParameter when n < 2 or n is not a power of two, or when the
/// input holds more than n real elements.
BuildResult oblivious_build(std::span<const Slot> elems, std::uint32_t n,
                            std::uint32_t k, std::uint32_t c, HashFamily fam,
                            std::uint16_t level_id, Rng& rng,
                            TraceRecorder* recorder);

/// Exact number of bucket accesses oblivious_build records.
std::uint64_t build_access_count(std::uint64_t m_total, std::uint32_t n,
                                 std::uint32_t k, std::uint32_t c);

}  // namespace pyramid::ozht
