#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pyramid/hash_family.hpp"
#include "pyramid/rng.hpp"
#include "pyramid/slot.hpp"
#include "pyramid/trace.hpp"

namespace pyramid {

/// Zigzag hash table: k tables of n buckets x c slots. Table j uses the
/// hash member (level_id, j) of the family; the zigzag path of a key is
/// h_0(key), ..., h_{k-1}(key).
class Zht {
 public:
  Zht(std::uint32_t n, std::uint32_t k, std::uint32_t c, HashFamily fam,
      std::uint16_t level_id = 1);

  std::uint32_t n() const { return n_; }
  std::uint32_t k() const { return k_; }
  std::uint32_t c() const { return c_; }
  std::uint16_t level_id() const { return level_id_; }
  const HashFamily& family() const { return fam_; }

  Table& table(std::uint32_t j) { return tables_[j]; }
  const Table& table(std::uint32_t j) const { return tables_[j]; }

  Region region(std::uint32_t j) const {
    return Region::table_of(level_id_, static_cast<std::uint16_t>(j));
  }

  std::uint32_t bucket_of(std::uint32_t j, std::uint32_t key) const {
    return hash_bucket(fam_, level_id_, j, key, n_);
  }
  std::vector<std::uint32_t> path(std::uint32_t key) const;

  /// Real slots per table (diagnostic scan, not part of any trace).
  std::vector<std::uint64_t> occupancy() const;
  std::uint64_t real_count() const;

  friend bool operator==(const Zht&, const Zht&) = default;

 private:
  std::uint32_t n_;
  std::uint32_t k_;
  std::uint32_t c_;
  HashFamily fam_;
  std::uint16_t level_id_;
  std::vector<Table> tables_;
};

namespace zht {

/// Oblivious insert along `path` (one bucket per table). Every bucket on the
/// path gets a read-modify-write; `e` lands in the first Empty slot (or Dummy
/// slot when allowed) of the earliest bucket with room. Returns false, with
/// the tables unchanged, when the whole path is full.
bool zigzag_insert(Zht& z, const Slot& e, std::span<const std::uint32_t> path,
                   bool allow_overwrite_dummy, TraceRecorder* recorder);

/// Lower-level insert over tables first_table..k-1 with `path` holding one
/// bucket per visited table. Every visited bucket is read-modify-written;
/// nothing is written when `active` is false. Returns the table the element
/// landed in, or k when it was not placed.
std::uint32_t insert_from(Zht& z, const Slot& e, std::uint32_t first_table,
                          std::span<const std::uint32_t> path,
                          bool allow_overwrite_dummy, bool active,
                          TraceRecorder* recorder);

enum class PathSource { kPrf, kRandom };

struct ThrowResult {
  /// Real elements that found the bucket of table j full and moved on.
  std::vector<std::uint64_t> spills_per_table;
  /// Real elements that found no slot on their whole path.
  std::uint64_t failed = 0;

  bool ok() const { return failed == 0; }
};

/// Inserts every input slot: real elements along their PRF path (or a fresh
/// uniform path), dummy and empty inputs as one random-bucket
/// read-modify-write per table. Exactly k bucket accesses per input and k
/// RNG draws per input regardless of content.
/// Throws InvalidParameter if the input holds more than n real elements.
ThrowResult throw_elements(Zht& z, std::span<const Slot> elems,
                           PathSource path_source, Rng& rng,
                           TraceRecorder* recorder,
                           bool allow_overwrite_dummy = false);

/// Full-path search: one read-modify-write of bucket h_j(key) in every table,
/// never exiting early. With `remove`, a match is replaced by a dummy in
/// place. Throws InvalidParameter for the sentinel key.
std::optional<Slot> search(Zht& z, std::uint32_t key, bool remove,
                           TraceRecorder* recorder);

/// One uniformly random bucket per table, read and written back unchanged.
void dummy_search(Zht& z, Rng& rng, TraceRecorder* recorder);

/// Debug validator: every real slot sits at its hash bucket in its table and
/// every key appears once. Returns an empty string when valid, otherwise a
/// description of the first violation.
std::string validate(const Zht& z);

}  // namespace zht
}  // namespace pyramid
