#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pyramid {

enum class RegionKind : std::uint8_t { kL0 = 0, kTable = 1 };

/// Memory region visible to the adversary: the level-0 log, or table
/// `table` (0-based) of level `level`.
struct Region {
  RegionKind kind = RegionKind::kTable;
  std::uint16_t level = 0;
  std::uint16_t table = 0;

  static constexpr Region l0() { return {RegionKind::kL0, 0, 0}; }
  static constexpr Region table_of(std::uint16_t level, std::uint16_t table) {
    return {RegionKind::kTable, level, table};
  }

  /// Decimal region id used in the CSV export: 0 for L0, otherwise
  /// 1 + level * 256 + table.
  std::uint32_t code() const {
    return kind == RegionKind::kL0 ? 0u : 1u + level * 256u + table;
  }
  static Region from_code(std::uint32_t code);

  friend bool operator==(const Region&, const Region&) = default;
};

enum class AccessOp : std::uint8_t { kRead = 0, kWrite = 1, kReadWrite = 2 };

struct TraceEvent {
  Region region;
  std::uint32_t index = 0;
  AccessOp op = AccessOp::kReadWrite;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Event with the index erased.
struct ShapeEvent {
  Region region;
  AccessOp op = AccessOp::kReadWrite;

  friend bool operator==(const ShapeEvent&, const ShapeEvent&) = default;
};

using Shape = std::vector<ShapeEvent>;

Shape shape(std::span<const TraceEvent> trace);

/// Byte encoding of a shape (5 bytes per event); equal shapes encode to
/// equal byte strings.
std::string shape_bytes(std::span<const ShapeEvent> s);

/// Append-only access log. Always counts events; stores them only while
/// enabled, so long runs can be instrumented without holding the trace.
class TraceRecorder {
 public:
  explicit TraceRecorder(bool enabled = true) : enabled_(enabled) {}

  void record(Region region, std::uint32_t index, AccessOp op) {
    ++count_;
    if (enabled_) {
      events_.push_back({region, index, op});
      shape_cache_.reset();
    }
  }

  bool enabled() const { return enabled_; }
  void set_enabled(bool on) { enabled_ = on; }

  /// Events recorded so far, enabled or not.
  std::uint64_t count() const { return count_; }
  std::span<const TraceEvent> events() const { return events_; }

  const Shape& shape() const;

  void clear() {
    events_.clear();
    count_ = 0;
    shape_cache_.reset();
  }

 private:
  bool enabled_;
  std::uint64_t count_ = 0;
  std::vector<TraceEvent> events_;
  mutable std::optional<Shape> shape_cache_;
};

inline void note(TraceRecorder* rec, Region region, std::uint32_t index,
                 AccessOp op) {
  if (rec != nullptr) rec->record(region, index, op);
}

/// Writes one `region,index,op` line per event (all decimal).
void export_csv(std::ostream& os, std::span<const TraceEvent> trace);
std::vector<TraceEvent> import_csv(std::istream& is);

struct ChiSquareResult {
  double statistic = 0.0;
  double critical = 0.0;
  std::uint64_t dof = 0;
  std::uint64_t total = 0;
  bool pass = false;
};

/// Pearson goodness-of-fit against the uniform distribution over
/// counts.size() cells. Throws InsufficientData unless the total is at least
/// five times the cell count, InvalidParameter for fewer than two cells or a
/// significance outside (0, 1).
ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts,
                                   double significance);

/// Per-bucket event counts for one region.
std::vector<std::uint64_t> index_histogram(std::span<const TraceEvent> trace,
                                           Region region,
                                           std::uint32_t buckets);

}  // namespace pyramid
