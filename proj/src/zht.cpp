#include "pyramid/zht.hpp"

#include <unordered_set>

#include "pyramid/errors.hpp"
#include "pyramid/oprim.hpp"

namespace pyramid {

Zht::Zht(std::uint32_t n, std::uint32_t k, std::uint32_t c, HashFamily fam,
         std::uint16_t level_id)
    : n_(n), k_(k), c_(c), fam_(fam), level_id_(level_id) {
  if (!is_power_of_two(n)) throw InvalidParameter("ZHT n must be a power of two");
  if (k == 0 || k > 256) throw InvalidParameter("ZHT k must lie in [1, 256]");
  if (c == 0) throw InvalidParameter("ZHT c must be positive");
  tables_.reserve(k);
  for (std::uint32_t j = 0; j < k; ++j) tables_.emplace_back(n, c);
}

std::vector<std::uint32_t> Zht::path(std::uint32_t key) const {
  std::vector<std::uint32_t> p(k_);
  for (std::uint32_t j = 0; j < k_; ++j) p[j] = bucket_of(j, key);
  return p;
}

std::vector<std::uint64_t> Zht::occupancy() const {
  std::vector<std::uint64_t> out(k_, 0);
  for (std::uint32_t j = 0; j < k_; ++j) {
    for (const auto& s : tables_[j].slots()) out[j] += s.is_real();
  }
  return out;
}

std::uint64_t Zht::real_count() const {
  std::uint64_t total = 0;
  for (auto v : occupancy()) total += v;
  return total;
}

namespace zht {

std::uint32_t insert_from(Zht& z, const Slot& e, std::uint32_t first_table,
                          std::span<const std::uint32_t> path,
                          bool allow_overwrite_dummy, bool active,
                          TraceRecorder* recorder) {
  const std::uint32_t k = z.k();
  bool placed = !active;
  std::uint32_t where = k;
  for (std::uint32_t j = first_table; j < k; ++j) {
    const std::uint32_t b = path[j - first_table];
    note(recorder, z.region(j), b, AccessOp::kReadWrite);
    for (Slot& s : z.table(j).bucket(b)) {
      const bool avail =
          (!placed) & (s.is_empty() | (allow_overwrite_dummy & s.is_dummy()));
      oprim::cond_assign(avail, s, e);
      where = oprim::cond_select<std::uint32_t>(avail, j, where);
      placed |= avail;
    }
  }
  return where;
}

bool zigzag_insert(Zht& z, const Slot& e, std::span<const std::uint32_t> path,
                   bool allow_overwrite_dummy, TraceRecorder* recorder) {
  if (!e.is_real()) throw InvalidParameter("zigzag_insert needs a real element");
  if (path.size() != z.k()) throw InvalidParameter("path length must equal k");
  for (auto b : path) {
    if (b >= z.n()) throw InvalidParameter("path bucket out of range");
  }
  return insert_from(z, e, 0, path, allow_overwrite_dummy, true, recorder) < z.k();
}

ThrowResult throw_elements(Zht& z, std::span<const Slot> elems,
                           PathSource path_source, Rng& rng,
                           TraceRecorder* recorder,
                           bool allow_overwrite_dummy) {
  std::uint64_t reals = 0;
  for (const auto& e : elems) reals += e.is_real();
  if (reals > z.n()) {
    throw InvalidParameter("throw: more real elements than ZHT capacity");
  }
  const std::uint32_t k = z.k();
  const bool use_prf = path_source == PathSource::kPrf;
  ThrowResult result;
  result.spills_per_table.assign(k, 0);
  std::vector<std::uint32_t> path(k);
  for (const auto& e : elems) {
    const bool real = e.is_real();
    const std::uint32_t key = oprim::cond_select<std::uint32_t>(real, e.key, 0);
    for (std::uint32_t j = 0; j < k; ++j) {
      const std::uint32_t random = random_bucket(rng, z.n());
      if (use_prf) {
        path[j] = oprim::cond_select<std::uint32_t>(real, z.bucket_of(j, key),
                                                    random);
      } else {
        path[j] = random;
      }
    }
    Slot incoming = e;
    incoming.tag = oprim::cond_select<std::uint8_t>(real, 1, 0);
    const std::uint32_t where =
        insert_from(z, incoming, 0, path, allow_overwrite_dummy, real, recorder);
    for (std::uint32_t j = 0; j < k; ++j) {
      result.spills_per_table[j] += real & (where > j);
    }
    result.failed += real & (where == k);
  }
  return result;
}

std::optional<Slot> search(Zht& z, std::uint32_t key, bool remove,
                           TraceRecorder* recorder) {
  if (key > kMaxRealKey) throw InvalidParameter("search key is the sentinel");
  const Slot dummy = Slot::dummy();
  Slot found = Slot::empty();
  bool hit = false;
  for (std::uint32_t j = 0; j < z.k(); ++j) {
    const std::uint32_t b = z.bucket_of(j, key);
    note(recorder, z.region(j), b, AccessOp::kReadWrite);
    for (Slot& s : z.table(j).bucket(b)) {
      const bool match = s.is_real() & (s.key == key);
      oprim::cond_assign(match, found, s);
      oprim::cond_assign(match & remove, s, dummy);
      hit |= match;
    }
  }
  if (!hit) return std::nullopt;
  return found;
}

void dummy_search(Zht& z, Rng& rng, TraceRecorder* recorder) {
  for (std::uint32_t j = 0; j < z.k(); ++j) {
    const std::uint32_t b = random_bucket(rng, z.n());
    note(recorder, z.region(j), b, AccessOp::kReadWrite);
    for (Slot& s : z.table(j).bucket(b)) oprim::cond_assign(false, s, s);
  }
}

std::string validate(const Zht& z) {
  std::unordered_set<std::uint32_t> seen;
  for (std::uint32_t j = 0; j < z.k(); ++j) {
    const Table& t = z.table(j);
    for (std::uint32_t b = 0; b < z.n(); ++b) {
      for (const auto& s : t.bucket(b)) {
        if (!s.well_formed()) {
          return "malformed slot in table " + std::to_string(j);
        }
        if (!s.is_real()) continue;
        if (z.bucket_of(j, s.key) != b) {
          return "key " + std::to_string(s.key) + " off its hash bucket in table " +
                 std::to_string(j);
        }
        if (!seen.insert(s.key).second) {
          return "key " + std::to_string(s.key) + " stored twice";
        }
      }
    }
  }
  return {};
}

}  // namespace zht
}  // namespace pyramid
