#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pyramid/config.hpp"
#include "pyramid/hash_family.hpp"
#include "pyramid/ozht.hpp"
#include "pyramid/rng.hpp"
#include "pyramid/slot.hpp"
#include "pyramid/trace.hpp"
#include "pyramid/zht.hpp"

namespace pyramid {

enum class Op : std::uint8_t { kRead = 0, kWrite = 1 };

struct AccessRecord {
  std::uint64_t op_index = 0;
  bool found = false;
  int rebuilt_level = -1;
  std::uint64_t online_buckets = 0;
  std::uint64_t total_buckets = 0;
};

/// Hierarchical ORAM: an append log L0 of p slots plus levels L1..Ll, where
/// Li is a ZHT of capacity 2^(i-1) p. Which levels hold a table is a pure
/// function of the access counter.
class PyramidOram {
 public:
  using Element = std::pair<std::uint32_t, Payload>;

  /// Empty ORAM; equivalent to bulk_load with no elements.
  explicit PyramidOram(const PyramidConfig& cfg, TraceRecorder* recorder = nullptr);

  /// Builds the last level from `elems` padded with dummies to N slots.
  /// Throws InvalidParameter for more than N elements, duplicate keys or the
  /// sentinel key, and BuildFailure when the build fails under the policy.
  static PyramidOram bulk_load(std::span<const Element> elems,
                               const PyramidConfig& cfg,
                               TraceRecorder* recorder = nullptr);

  /// One oblivious access. Returns the payload held before the access, or
  /// nullopt when the key was absent. Throws CapacityExceeded (after the
  /// access completed as a dummy append) for a fresh-key Write at capacity.
  std::optional<Payload> access(std::uint32_t key, Op op,
                                const std::optional<Payload>& new_value,
                                TraceRecorder* recorder = nullptr);

  std::optional<Payload> read(std::uint32_t key, TraceRecorder* recorder = nullptr) {
    return access(key, Op::kRead, std::nullopt, recorder);
  }
  std::optional<Payload> write(std::uint32_t key, const Payload& value,
                               TraceRecorder* recorder = nullptr) {
    return access(key, Op::kWrite, value, recorder);
  }

  const PyramidConfig& config() const { return cfg_; }
  std::uint64_t counter() const { return t_; }
  std::uint64_t real_count() const { return real_count_; }
  std::uint32_t level_count() const { return cfg_.level_count(); }

  const AccessRecord& last_record() const { return last_; }
  const ozht::BuildReport& last_build_report() const { return last_build_; }
  std::uint64_t build_retries() const { return retries_; }

  std::span<const Slot> level0() const { return level0_; }
  /// Table of level i (1..l), or nullptr when the level is empty.
  const Zht* level(std::uint32_t i) const;

  /// Called with (target level, counter) right before a rebuild starts.
  void set_pre_rebuild_hook(std::function<void(std::uint32_t, std::uint64_t)> hook) {
    pre_rebuild_ = std::move(hook);
  }

  /// Test hook: flips bit 0 of the stored payload of `key`. Returns false if
  /// the key is not stored.
  bool inject_fault(std::uint32_t key);

  /// Test hook: logs the keys of real searches per level and counts repeats
  /// of a key at a level between two rebuilds of that level.
  void enable_search_log(bool on);
  std::uint64_t search_key_repeats() const { return search_repeats_; }

  /// Full structural check: schedule, per-level ZHT validity, single
  /// residency of every key, and the live count. Empty string when valid.
  std::string validate() const;

 private:
  PyramidOram(const PyramidConfig& cfg, int);
  int rebuild_if_due(TraceRecorder* recorder);
  void build_level(std::uint32_t target, std::vector<Slot> input,
                   TraceRecorder* recorder);

  PyramidConfig cfg_;
  Rng rng_;
  HashFamily fam_;
  std::vector<Slot> level0_;
  std::vector<std::optional<Zht>> levels_;
  std::uint64_t t_ = 0;
  std::uint64_t real_count_ = 0;
  AccessRecord last_;
  ozht::BuildReport last_build_;
  std::uint64_t retries_ = 0;
  std::function<void(std::uint32_t, std::uint64_t)> pre_rebuild_;
  bool search_log_on_ = false;
  std::vector<std::unordered_set<std::uint32_t>> search_log_;
  std::uint64_t search_repeats_ = 0;
};

}  // namespace pyramid
