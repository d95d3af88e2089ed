#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace pyramid {

enum class FailurePolicy : std::uint8_t { kStrictAbort = 0, kRetry = 1 };

struct LevelParams {
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::uint32_t c = 0;

  friend bool operator==(const LevelParams&, const LevelParams&) = default;
};

/// Parameters of one Pyramid ORAM instance. Level i (1-based) holds
/// n_i = 2^(i-1) p elements in k_i tables of n_i buckets x c slots.
struct PyramidConfig {
  std::uint64_t capacity = 1u << 14;
  std::uint32_t first_level_size = 1024;
  std::uint32_t c = 4;
  /// 0 selects k_i = max(2, ceil(log2 log2 n_i)) per level.
  std::uint32_t k_override = 0;
  std::uint64_t seed = 0;
  FailurePolicy policy = FailurePolicy::kStrictAbort;
  std::uint32_t max_retries = 3;

  /// Throws InvalidParameter on inconsistent values.
  void validate() const;

  /// l = log2(N / p) + 1.
  std::uint32_t level_count() const;
  LevelParams level(std::uint32_t i) const;
  std::vector<LevelParams> levels() const;

  friend bool operator==(const PyramidConfig&, const PyramidConfig&) = default;
};

/// max(2, ceil(log2 log2 n)) for power-of-two n >= 2.
std::uint32_t default_k(std::uint32_t n);

inline constexpr int kConfigVersion = 1;

nlohmann::json config_to_json(const PyramidConfig& cfg);
/// Throws InvalidParameter for a wrong version, missing fields, a payload
/// size different from the build's, or level parameters that disagree with
/// the derived ones.
PyramidConfig config_from_json(const nlohmann::json& j);

std::string_view to_string(FailurePolicy p);
FailurePolicy failure_policy_from_string(std::string_view s);

// Schedule. `t` counts completed accesses; the state "at t" is the state
// after the t-th access and its rebuild.

/// Whether level i (1..l) holds a table at counter t. The last level is
/// always present.
bool level_nonempty(const PyramidConfig& cfg, std::uint64_t t, std::uint32_t i);

/// Level rebuilt at the end of the access that brings the counter to t, or
/// -1. Rebuilding level i merges L0 and levels 1..i-1 (and the old L_l when
/// i = l) into it.
int rebuild_target(const PyramidConfig& cfg, std::uint64_t t);

/// Online events of the access made at counter t: p L0 slot events plus k_i
/// bucket events per non-empty level.
std::uint64_t online_cost(const PyramidConfig& cfg, std::uint64_t t);

/// Slots fed to the build of level `target`.
std::uint64_t rebuild_input_slots(const PyramidConfig& cfg, std::uint32_t target);

/// Events of a rebuild of level `target`: source reads plus the build.
std::uint64_t rebuild_cost(const PyramidConfig& cfg, std::uint32_t target);

/// All events of the access made at counter t: online, the L0 append, and
/// the rebuild it triggers.
std::uint64_t total_cost(const PyramidConfig& cfg, std::uint64_t t);

/// Sum of total_cost over one period of N accesses (the schedule is periodic
/// in N).
std::uint64_t period_cost(const PyramidConfig& cfg);

/// period_cost / N.
double amortized_cost(const PyramidConfig& cfg);

}  // namespace pyramid
