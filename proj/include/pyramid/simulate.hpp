#pragma once

#include <cstdint>
#include <vector>

#include "pyramid/config.hpp"
#include "pyramid/rng.hpp"
#include "pyramid/trace.hpp"

namespace pyramid::sim {

/// Trace of an oblivious build over m all-dummy input slots.
std::vector<TraceEvent> sim_build(std::uint64_t m, std::uint32_t n,
                                  std::uint32_t k, std::uint32_t c,
                                  std::uint16_t level_id, Rng& rng);

/// k events: one uniformly random bucket per table.
std::vector<TraceEvent> sim_search(std::uint32_t n, std::uint32_t k,
                                   std::uint16_t level_id, Rng& rng);

/// k * m events: one uniformly random bucket per table for each element.
std::vector<TraceEvent> sim_throw(std::uint64_t m, std::uint32_t n,
                                  std::uint32_t k, std::uint16_t level_id,
                                  Rng& rng);

/// Trace of the access a Pyramid ORAM makes at counter t, produced from the
/// configuration alone (including the rebuild that access triggers).
std::vector<TraceEvent> sim_access(const PyramidConfig& cfg, std::uint64_t t,
                                   Rng& rng);

}  // namespace pyramid::sim
