#include "pyramid/pyramid_oram.hpp"

#include <unordered_map>

#include "pyramid/errors.hpp"
#include "pyramid/oprim.hpp"

namespace pyramid {

PyramidOram::PyramidOram(const PyramidConfig& cfg, TraceRecorder* recorder)
    : PyramidOram(bulk_load({}, cfg, recorder)) {}

PyramidOram PyramidOram::bulk_load(std::span<const Element> elems,
                                   const PyramidConfig& cfg,
                                   TraceRecorder* recorder) {
  cfg.validate();
  if (elems.size() > cfg.capacity) {
    throw InvalidParameter("bulk load exceeds capacity");
  }
  std::unordered_set<std::uint32_t> keys;
  std::vector<Slot> input;
  input.reserve(cfg.capacity);
  for (const auto& [key, value] : elems) {
    if (key > kMaxRealKey) throw InvalidParameter("bulk load uses the sentinel key");
    if (!keys.insert(key).second) throw InvalidParameter("bulk load has duplicate keys");
    input.push_back(Slot::real(key, value));
  }
  input.resize(cfg.capacity, Slot::dummy());

  PyramidOram o(cfg, 0);
  o.real_count_ = elems.size();
  o.build_level(cfg.level_count(), std::move(input), recorder);
  return o;
}

// Private tag constructor: allocates the empty layout without building.
PyramidOram::PyramidOram(const PyramidConfig& cfg, int)
    : cfg_(cfg),
      rng_(Rng::substream(cfg.seed, 0)),
      fam_(mix64(cfg.seed ^ 0x452821e638d01377ULL)),
      level0_(cfg.first_level_size, Slot::empty()),
      levels_(cfg.level_count() + 1),
      search_log_(cfg.level_count() + 1) {}

const Zht* PyramidOram::level(std::uint32_t i) const {
  if (i < 1 || i > level_count()) throw InvalidParameter("level out of range");
  return levels_[i] ? &*levels_[i] : nullptr;
}

std::optional<Payload> PyramidOram::access(std::uint32_t key, Op op,
                                           const std::optional<Payload>& new_value,
                                           TraceRecorder* recorder) {
  if (key > kMaxRealKey) throw InvalidParameter("access uses the sentinel key");
  if (op == Op::kWrite && !new_value) {
    throw InvalidParameter("write needs a value");
  }
  TraceRecorder counter(false);
  TraceRecorder* rec = recorder != nullptr ? recorder : &counter;
  const std::uint64_t start = rec->count();

  const Slot dummy = Slot::dummy();
  Slot cached = Slot::empty();
  bool found = false;
  for (std::uint32_t s = 0; s < level0_.size(); ++s) {
    note(rec, Region::l0(), s, AccessOp::kReadWrite);
    Slot& slot = level0_[s];
    const bool match = slot.is_real() & (slot.key == key);
    oprim::cond_assign(match, cached, slot);
    oprim::cond_assign(match, slot, dummy);
    found |= match;
  }
  for (std::uint32_t i = 1; i <= level_count(); ++i) {
    if (!levels_[i]) continue;
    Zht& z = *levels_[i];
    if (found) {
      zht::dummy_search(z, rng_, rec);
      continue;
    }
    if (search_log_on_ && !search_log_[i].insert(key).second) ++search_repeats_;
    if (auto hit = zht::search(z, key, true, rec)) {
      cached = *hit;
      found = true;
    }
  }
  const std::uint64_t online = rec->count() - start;

  // `found` also covers absent-key markers; only elements count as hits.
  const bool present = found & cached.holds_element();
  std::optional<Payload> result;
  if (present) result = cached.payload;

  const bool overflow = op == Op::kWrite && !present && real_count_ >= cfg_.capacity;
  Slot append = Slot::absent_marker(key);
  if (op == Op::kWrite && !overflow) {
    append = Slot::real(key, *new_value);
  } else if (found) {
    append = cached;
    append.tag = 1;
  }
  real_count_ += op == Op::kWrite && !present && !overflow;

  const std::uint32_t pos = static_cast<std::uint32_t>(t_ % cfg_.first_level_size);
  note(rec, Region::l0(), pos, AccessOp::kWrite);
  level0_[pos] = append;
  last_ = {t_, present, -1, online, 0};
  ++t_;
  last_.rebuilt_level = rebuild_if_due(rec);
  last_.total_buckets = rec->count() - start;

  if (overflow) throw CapacityExceeded("write of a fresh key at full capacity");
  return result;
}

int PyramidOram::rebuild_if_due(TraceRecorder* recorder) {
  const int target = rebuild_target(cfg_, t_);
  if (target < 0) return -1;
  const auto tgt = static_cast<std::uint32_t>(target);
  if (pre_rebuild_) pre_rebuild_(tgt, t_);

  std::vector<Slot> input;
  input.reserve(rebuild_input_slots(cfg_, tgt));
  for (std::uint32_t s = 0; s < level0_.size(); ++s) {
    note(recorder, Region::l0(), s, AccessOp::kRead);
    input.push_back(level0_[s]);
    level0_[s] = Slot::empty();
  }
  const bool full = tgt == level_count();
  const std::uint32_t last_source = full ? tgt : tgt - 1;
  for (std::uint32_t j = 1; j <= last_source; ++j) {
    if (!levels_[j]) throw InvalidParameter("rebuild source level is empty");
    Zht& z = *levels_[j];
    for (std::uint32_t tab = 0; tab < z.k(); ++tab) {
      for (std::uint32_t b = 0; b < z.n(); ++b) {
        note(recorder, z.region(tab), b, AccessOp::kRead);
        for (const Slot& s : z.table(tab).bucket(b)) input.push_back(s);
      }
    }
    levels_[j].reset();
  }
  if (full) {
    // Markers are only needed until the next full rebuild.
    const Slot dummy = Slot::dummy();
    for (Slot& s : input) {
      oprim::cond_assign(s.is_real() & (s.flags == Slot::kAbsentMarker), s, dummy);
    }
  }
  build_level(tgt, std::move(input), recorder);
  return target;
}

void PyramidOram::build_level(std::uint32_t target, std::vector<Slot> input,
                              TraceRecorder* recorder) {
  const LevelParams lp = cfg_.level(target);
  const std::uint32_t attempts =
      cfg_.policy == FailurePolicy::kRetry ? 1 + cfg_.max_retries : 1;
  for (std::uint32_t a = 0; a < attempts; ++a) {
    fam_ = fresh_epoch(fam_);
    auto built = ozht::oblivious_build(input, lp.n, lp.k, lp.c, fam_,
                                       static_cast<std::uint16_t>(target), rng_,
                                       recorder);
    last_build_ = built.report;
    if (built.report.success) {
      levels_[target] = std::move(built.zht);
      search_log_[target].clear();
      for (std::uint32_t j = 1; j < target; ++j) search_log_[j].clear();
      return;
    }
    if (a + 1 < attempts) ++retries_;
  }
  throw BuildFailure("oblivious build of level " + std::to_string(target) +
                     " failed: " + std::string(ozht::to_string(last_build_.failure_reason)));
}

bool PyramidOram::inject_fault(std::uint32_t key) {
  for (Slot& s : level0_) {
    if (s.holds_element() && s.key == key) {
      s.payload[0] ^= 1u;
      return true;
    }
  }
  for (std::uint32_t i = 1; i <= level_count(); ++i) {
    if (!levels_[i]) continue;
    Zht& z = *levels_[i];
    for (std::uint32_t j = 0; j < z.k(); ++j) {
      for (Slot& s : z.table(j).slots()) {
        if (s.holds_element() && s.key == key) {
          s.payload[0] ^= 1u;
          return true;
        }
      }
    }
  }
  return false;
}

void PyramidOram::enable_search_log(bool on) {
  search_log_on_ = on;
  for (auto& s : search_log_) s.clear();
  search_repeats_ = 0;
}

std::string PyramidOram::validate() const {
  for (std::uint32_t i = 1; i <= level_count(); ++i) {
    if (levels_[i].has_value() != level_nonempty(cfg_, t_, i)) {
      return "level " + std::to_string(i) + " presence disagrees with the schedule";
    }
  }
  std::unordered_map<std::uint32_t, int> where;
  std::uint64_t reals = 0;
  for (const Slot& s : level0_) {
    if (!s.well_formed()) return "malformed L0 slot";
    if (!s.is_real()) continue;
    reals += s.holds_element();
    if (!where.emplace(s.key, 0).second) {
      return "key " + std::to_string(s.key) + " stored twice";
    }
  }
  for (std::uint32_t i = 1; i <= level_count(); ++i) {
    if (!levels_[i]) continue;
    const Zht& z = *levels_[i];
    if (auto err = zht::validate(z); !err.empty()) {
      return "level " + std::to_string(i) + ": " + err;
    }
    for (std::uint32_t j = 0; j < z.k(); ++j) {
      for (const Slot& s : z.table(j).slots()) {
        if (!s.is_real()) continue;
        reals += s.holds_element();
        if (!where.emplace(s.key, static_cast<int>(i)).second) {
          return "key " + std::to_string(s.key) + " stored twice";
        }
      }
    }
  }
  if (reals != real_count_) {
    return "live count " + std::to_string(real_count_) + " but " +
           std::to_string(reals) + " real slots stored";
  }
  return {};
}

}  // namespace pyramid
