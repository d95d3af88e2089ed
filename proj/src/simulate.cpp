#include "pyramid/simulate.hpp"

#include "pyramid/ozht.hpp"

namespace pyramid::sim {

std::vector<TraceEvent> sim_build(std::uint64_t m, std::uint32_t n,
                                  std::uint32_t k, std::uint32_t c,
                                  std::uint16_t level_id, Rng& rng) {
  std::vector<Slot> dummies(m, Slot::dummy());
  TraceRecorder rec;
  ozht::oblivious_build(dummies, n, k, c, HashFamily(rng.next()), level_id, rng,
                        &rec);
  return {rec.events().begin(), rec.events().end()};
}

std::vector<TraceEvent> sim_search(std::uint32_t n, std::uint32_t k,
                                   std::uint16_t level_id, Rng& rng) {
  return sim_throw(1, n, k, level_id, rng);
}

std::vector<TraceEvent> sim_throw(std::uint64_t m, std::uint32_t n,
                                  std::uint32_t k, std::uint16_t level_id,
                                  Rng& rng) {
  std::vector<TraceEvent> out;
  out.reserve(m * k);
  for (std::uint64_t e = 0; e < m; ++e) {
    for (std::uint32_t j = 0; j < k; ++j) {
      out.push_back({Region::table_of(level_id, static_cast<std::uint16_t>(j)),
                     random_bucket(rng, n), AccessOp::kReadWrite});
    }
  }
  return out;
}

std::vector<TraceEvent> sim_access(const PyramidConfig& cfg, std::uint64_t t,
                                   Rng& rng) {
  std::vector<TraceEvent> out;
  const std::uint32_t p = cfg.first_level_size;
  for (std::uint32_t s = 0; s < p; ++s) {
    out.push_back({Region::l0(), s, AccessOp::kReadWrite});
  }
  const std::uint32_t l = cfg.level_count();
  for (std::uint32_t i = 1; i <= l; ++i) {
    if (!level_nonempty(cfg, t, i)) continue;
    const auto lp = cfg.level(i);
    auto ev = sim_search(lp.n, lp.k, static_cast<std::uint16_t>(i), rng);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  out.push_back({Region::l0(), static_cast<std::uint32_t>(t % p), AccessOp::kWrite});

  const int target = rebuild_target(cfg, t + 1);
  if (target < 0) return out;
  const auto tgt = static_cast<std::uint32_t>(target);
  for (std::uint32_t s = 0; s < p; ++s) out.push_back({Region::l0(), s, AccessOp::kRead});
  const std::uint32_t last_source = tgt == l ? l : tgt - 1;
  for (std::uint32_t j = 1; j <= last_source; ++j) {
    const auto lp = cfg.level(j);
    for (std::uint32_t tab = 0; tab < lp.k; ++tab) {
      for (std::uint32_t b = 0; b < lp.n; ++b) {
        out.push_back({Region::table_of(static_cast<std::uint16_t>(j),
                                        static_cast<std::uint16_t>(tab)),
                       b, AccessOp::kRead});
      }
    }
  }
  const auto tp = cfg.level(tgt);
  auto build = sim_build(rebuild_input_slots(cfg, tgt), tp.n, tp.k, tp.c,
                         static_cast<std::uint16_t>(tgt), rng);
  out.insert(out.end(), build.begin(), build.end());
  return out;
}

}  // namespace pyramid::sim
