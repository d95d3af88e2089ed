#include "pyramid/ozht.hpp"

#include <bit>

#include "pyramid/errors.hpp"
#include "pyramid/oprim.hpp"
#include "pyramid/prn.hpp"

namespace pyramid::ozht {

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::kNone:
      return "none";
    case FailureReason::kThrowOverflow:
      return "throw_overflow";
    case FailureReason::kFinalPhaseSpill:
      return "final_phase_spill";
  }
  return "unknown";
}

namespace {

prn::RoutingTable to_routing(const Zht& z, std::uint32_t j) {
  const Table& t = z.table(j);
  prn::RoutingTable out(z.n(), z.c());
  auto src = t.slots();
  auto dst = out.slots();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Slot& s = src[i];
    const std::uint32_t key = oprim::cond_select<std::uint32_t>(s.is_real(), s.key, 0);
    dst[i].slot = s;
    dst[i].dest = z.bucket_of(j, key);
  }
  return out;
}

void from_routing(const prn::RoutingTable& rt, Zht& z, std::uint32_t j) {
  auto src = rt.slots();
  auto dst = z.table(j).slots();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i].slot;
}

}  // namespace

BuildResult oblivious_build(std::span<const Slot> elems, std::uint32_t n,
                            std::uint32_t k, std::uint32_t c, HashFamily fam,
                            std::uint16_t level_id, Rng& rng,
                            TraceRecorder* recorder) {
  if (!is_power_of_two(n) || n < 2) {
    throw InvalidParameter("oblivious build needs a power-of-two n >= 2");
  }
  BuildResult out{Zht(n, k, c, fam, level_id), {}};
  Zht& z = out.zht;
  BuildReport& rep = out.report;
  rep.spills_after_phase.assign(k, 0);
  rep.arrivals_per_table.assign(k, 0);

  const auto thrown =
      zht::throw_elements(z, elems, zht::PathSource::kRandom, rng, recorder, true);
  std::uint64_t placed = 0;
  for (const auto& e : elems) placed += e.is_real();
  placed -= thrown.failed;
  for (std::uint32_t j = 0; j < k; ++j) {
    const std::uint64_t passed = thrown.spills_per_table[j];
    const std::uint64_t entered = j == 0 ? placed + thrown.failed
                                         : thrown.spills_per_table[j - 1];
    rep.arrivals_per_table[j] = entered - passed;
  }
  rep.lost = thrown.failed;

  std::uint64_t final_spill = 0;
  std::vector<std::uint32_t> path;
  const Slot dummy = Slot::dummy();
  for (std::uint32_t i = 0; i < k; ++i) {
    prn::RoutingTable rt = to_routing(z, i);
    const bool last = i + 1 == k;
    path.assign(k - 1 - i, 0);

    prn::RouteHooks hooks;
    hooks.final_pair = [&](std::uint32_t, std::uint32_t,
                           std::span<prn::RoutingSlot> a,
                           std::span<prn::RoutingSlot> b) {
      for (auto half : {a, b}) {
        for (prn::RoutingSlot& rs : half) {
          const bool spilled = rs.slot.is_real() & (rs.slot.tag == 0);
          if (last) {
            final_spill += spilled;
            continue;
          }
          for (auto& p : path) p = random_bucket(rng, n);
          Slot moving = rs.slot;
          moving.tag = 1;
          const std::uint32_t where =
              zht::insert_from(z, moving, i + 1, path, true, spilled, recorder);
          const bool landed = spilled & (where < k);
          for (std::uint32_t j = i + 1; j < k; ++j) {
            rep.arrivals_per_table[j] += landed & (where == j);
          }
          rep.lost += spilled & !landed;
          oprim::cond_assign(landed, rs.slot, dummy);
        }
      }
    };
    const prn::RouteStats stats =
        prn::route(rt, rng, recorder, z.region(i), &hooks);
    rep.spills_after_phase[i] = stats.total_spills();
    from_routing(rt, z, i);
  }

  rep.occupancy_per_table = z.occupancy();
  if (rep.lost > 0) {
    rep.success = false;
    rep.failure_reason = FailureReason::kThrowOverflow;
  } else if (final_spill > 0) {
    rep.success = false;
    rep.failure_reason = FailureReason::kFinalPhaseSpill;
  }
  return out;
}

std::uint64_t build_access_count(std::uint64_t m_total, std::uint32_t n,
                                 std::uint32_t k, std::uint32_t c) {
  const std::uint64_t log_n = static_cast<std::uint64_t>(std::countr_zero(n));
  std::uint64_t total = static_cast<std::uint64_t>(k) * m_total;
  for (std::uint64_t i = 1; i <= k; ++i) {
    total += static_cast<std::uint64_t>(n) * log_n;
    total += (k - i) * static_cast<std::uint64_t>(n) * c;
  }
  return total;
}

}  // namespace pyramid::ozht
