// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <bit>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <boost/multiprecision/cpp_int.hpp>

#include "cli.hpp"
#include "pyramid/analysis.hpp"
#include "pyramid/errors.hpp"
#include "pyramid/ozht.hpp"
#include "pyramid/prn.hpp"
#include "pyramid/pyramid_oram.hpp"
#include "pyramid/simulate.hpp"
#include "pyramid/trace.hpp"
#include "pyramid/zht.hpp"

using namespace pyramid;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20240601;

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << what << " ("
            << detail << ")" << std::endl;
  failures += !pass;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

json run_cli(const cli::RunConfig& cfg, cli::ExitCode& code) {
  const auto r = cli::execute(cfg);
  code = r.code;
  return json::parse(r.text);
}

// ---------------------------------------------------------------------------

void oracle_equivalence() {
  cli::RunConfig cfg;
  cfg.subcommand = "verify";
  cfg.N = 1u << 14;
  cfg.p = 64;
  cfg.ops = 100000;
  cfg.seed = kSeed;
  const auto t0 = std::chrono::steady_clock::now();
  cli::ExitCode code{};
  const json doc = run_cli(cfg, code);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = code == cli::ExitCode::kPass && doc["mismatches"] == 0 &&
                    doc["structure"] == "" && secs < 300.0;
  report(1, pass, "1e5 random ops at N=2^14, p=64 match a reference map",
         "mismatches=" + doc["mismatches"].dump() + ", audit_reads=" +
             doc["audit_reads"].dump() + ", " + fmt(secs) + " s");
}

void verified_parameters() {
  const auto r = analysis::decay_check(2048, 4, 4, 100, kSeed, 1);
  const bool pass = r.trials == 100 && r.failures == 0 && r.late_table_nonempty == 0;
  report(2, pass, "100 full-load builds at n=2^11, k=c=4",
         "failures=" + std::to_string(r.failures) + ", builds with tables 3-4 non-empty=" +
             std::to_string(r.late_table_nonempty) + ", mean occupancy=[" +
             fmt(r.mean_occupancy[0]) + ", " + fmt(r.mean_occupancy[1]) + ", " +
             fmt(r.mean_occupancy[2]) + ", " + fmt(r.mean_occupancy[3]) + "]");
}

void prn_step_count() {
  bool pass = true;
  std::string detail;
  Rng rng(kSeed);
  for (std::uint32_t n : {8u, 64u, 1024u}) {
    const std::uint32_t c = 4;
    prn::RoutingTable table(n, c);
    auto slots = table.slots();
    for (std::uint32_t i = 0; i < n; ++i) {
      slots[i].slot = Slot::real(i, Payload{});
      slots[i].dest = random_bucket(rng, n);
    }
    TraceRecorder rec(false);
    const auto stats = prn::route(table, rng, &rec, Region::table_of(1, 0));
    const std::uint64_t expected =
        static_cast<std::uint64_t>(n / 2) * static_cast<std::uint64_t>(std::countr_zero(n));
    pass &= stats.repartitions == expected && rec.count() == 2 * expected;
    detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ": " +
              std::to_string(stats.repartitions) + "/" + std::to_string(expected);
  }
  report(3, pass, "repartitions equal (n/2) log2 n", detail);
}

void spill_bound() {
  using boost::multiprecision::cpp_int;
  cpp_int binom = 1;
  for (int i = 0; i < 5; ++i) {
    binom *= 1024 - i;
    binom /= i + 1;
  }
  const analysis::Rational oracle(binom, cpp_int(1) << 40);
  const auto bound = analysis::expected_spill_bound(1024, 1024, 4);
  const auto mc = analysis::mc_throw_spill(1024, 1024, 4, 10000, kSeed, 1);
  const auto rep = analysis::make_report({{"m", 1024}, {"n", 1024}, {"c", 4}}, bound.value, mc);
  const bool pass = bound.exact && *bound.exact == oracle && rep.trials == 10000 && rep.verdict;
  report(4, pass, "mean spill for m=n=1024, c=4 within C(1024,5)/1024^4",
         "bound=" + analysis::to_string(*bound.exact) + "=" + fmt(bound.value) +
             ", mc_mean=" + fmt(mc.mean) + " +- " + fmt(mc.stderr_));
}

void per_stage_spill() {
  const auto r = analysis::mc_prn_stage_spill(256, 2, 1.0, 10000, kSeed, 1);
  bool pass = r.per_stage.size() == 8 && r.total.trials == 10000;
  double worst = 0.0;
  for (const auto& s : r.per_stage) {
    const double limit = r.throw_spill.mean + 3 * (s.stderr_ + r.throw_spill.stderr_);
    pass &= s.mean <= limit;
    worst = std::max(worst, s.mean);
  }
  report(5, pass, "per-stage spill at n=256, c=2 within single-throw spill",
         "max stage mean=" + fmt(worst) + ", throw mean=" + fmt(r.throw_spill.mean) +
             " +- " + fmt(r.throw_spill.stderr_) + ", aggregate ratio=" +
             fmt(r.aggregate_ratio));
}

// Two ORAMs with the same public parameters but different data, keys and
// seeds must produce byte-identical shapes at every counter, equal to the
// simulator's.
bool shapes_match_for(const PyramidConfig& base, cli::WorkloadKind kind,
                      std::uint64_t ops, std::uint64_t seed, std::string& why) {
  PyramidConfig ca = base, cb = base;
  ca.seed = seed;
  cb.seed = seed ^ 0x9E3779B97F4A7C15ull;
  PyramidOram a(ca), b(cb);
  cli::RunConfig wa_cfg;
  wa_cfg.N = base.capacity;
  wa_cfg.workload = kind;
  cli::RunConfig wb_cfg = wa_cfg;
  wb_cfg.workload = cli::WorkloadKind::kUniform;
  cli::Workload wa(wa_cfg, seed), wb(wb_cfg, seed + 1);
  Rng values(seed), sim_rng(seed + 2);
  TraceRecorder ra, rb;
  for (std::uint64_t t = 0; t < ops; ++t) {
    ra.clear();
    rb.clear();
    const auto qa = wa.next();
    const auto qb = wb.next();
    std::optional<Payload> va, vb;
    if (qa.op == Op::kWrite) va = payload_from_u64(values.next());
    if (qb.op == Op::kWrite) vb = payload_from_u64(values.next());
    a.access(qa.key, qa.op, va, &ra);
    b.access(qb.key, qb.op, vb, &rb);
    const auto sa = shape_bytes(ra.shape());
    if (sa != shape_bytes(rb.shape())) {
      why = "data-dependent shape at t=" + std::to_string(t);
      return false;
    }
    if (sa != shape_bytes(shape(sim::sim_access(base, t, sim_rng)))) {
      why = "simulator shape differs at t=" + std::to_string(t);
      return false;
    }
  }
  return true;
}

bool simulators_match(std::string& why) {
  Rng rng(kSeed);
  const struct {
    std::uint64_t m;
    std::uint32_t n, k, c;
  } cases[] = {{64, 64, 2, 4}, {200, 64, 3, 4}, {40, 16, 2, 3}, {1024, 256, 4, 4}};
  for (const auto& cs : cases) {
    std::vector<Slot> input;
    const std::uint64_t reals = std::min<std::uint64_t>(cs.m, cs.n) * 3 / 4;
    for (std::uint64_t i = 0; i < cs.m; ++i) {
      input.push_back(i < reals ? Slot::real(static_cast<std::uint32_t>(i * 7 + 1),
                                             payload_from_u64(i))
                                : Slot::dummy());
    }
    const HashFamily fam(rng.next());
    TraceRecorder real_rec;
    const auto built = ozht::oblivious_build(input, cs.n, cs.k, cs.c, fam, 2, rng, &real_rec);
    const auto sim_trace = sim::sim_build(cs.m, cs.n, cs.k, cs.c, 2, rng);
    if (shape_bytes(real_rec.shape()) != shape_bytes(shape(sim_trace))) {
      why = "sim_build, m=" + std::to_string(cs.m) + " n=" + std::to_string(cs.n);
      return false;
    }

    Zht z = built.zht;
    for (std::uint32_t key : {1u, 8u, 999999u}) {
      TraceRecorder s;
      zht::search(z, key, false, &s);
      if (shape_bytes(s.shape()) != shape_bytes(shape(sim::sim_search(cs.n, cs.k, 2, rng)))) {
        why = "sim_search, n=" + std::to_string(cs.n);
        return false;
      }
    }

    Zht fresh(cs.n, cs.k, cs.c, fam, 2);
    std::vector<Slot> batch(input.begin(),
                            input.begin() + static_cast<std::ptrdiff_t>(
                                                std::min<std::uint64_t>(cs.m, cs.n)));
    TraceRecorder t;
    zht::throw_elements(fresh, batch, zht::PathSource::kRandom, rng, &t);
    if (shape_bytes(t.shape()) !=
        shape_bytes(shape(sim::sim_throw(batch.size(), cs.n, cs.k, 2, rng)))) {
      why = "sim_throw, n=" + std::to_string(cs.n);
      return false;
    }
  }
  return true;
}

void trace_shapes() {
  Rng pick(kSeed);
  const cli::WorkloadKind kinds[] = {cli::WorkloadKind::kUniform,
                                     cli::WorkloadKind::kSequential,
                                     cli::WorkloadKind::kZipf};
  bool pass = true;
  std::string why;
  int pairs = 0;
  for (int i = 0; i < 20 && pass; ++i) {
    PyramidConfig cfg;
    cfg.first_level_size = 1u << (2 + pick.uniform(3));             // 4..16
    cfg.capacity = cfg.first_level_size << (2 + pick.uniform(4));   // 4p..32p
    cfg.c = 4;
    cfg.k_override = pick.uniform(2) == 0 ? 0 : 3;
    const auto kind = kinds[pick.uniform(3)];
    const std::uint64_t ops = 2 * cfg.capacity + pick.uniform(cfg.first_level_size);
    pass &= shapes_match_for(cfg, kind, ops, pick.next(), why);
    if (!pass) {
      why = "pair " + std::to_string(i) + " (N=" + std::to_string(cfg.capacity) +
            ", p=" + std::to_string(cfg.first_level_size) + ", " +
            std::string(cli::to_string(kind)) + "): " + why;
    }
    ++pairs;
  }
  if (pass) pass = simulators_match(why);
  report(6, pass, "trace shapes are data-independent and simulatable",
         pass ? std::to_string(pairs) + " workload/config pairs plus sim_build, "
                                          "sim_search, sim_throw"
              : why);
}

void index_uniformity() {
  cli::RunConfig cfg;
  cfg.subcommand = "trace";
  cfg.N = 1024;
  cfg.p = 16;
  cfg.ops = 30000;
  cfg.seed = kSeed;
  cli::ExitCode code{};
  const json doc = run_cli(cfg, code);
  std::uint64_t tested = 0;
  bool levels_pass = true;
  for (const auto& lv : doc["levels"]) {
    if (!lv["tested"].get<bool>()) continue;
    ++tested;
    levels_pass &= lv["pass"].get<bool>();
  }
  const auto events = doc["online_events"].get<std::uint64_t>();
  const bool pass = code == cli::ExitCode::kPass && events >= 100000 && levels_pass &&
                    tested == doc["levels"].size();
  report(7, pass, "per-level bucket-index chi-square at significance 0.001",
         std::to_string(tested) + " of " + std::to_string(doc["levels"].size()) +
             " levels tested over " + std::to_string(events) + " online events");
}

void schedule_and_cost() {
  PyramidConfig cfg;
  cfg.capacity = 1024;
  cfg.first_level_size = 16;
  cfg.seed = kSeed;
  const std::uint64_t ops = 3 * cfg.capacity;
  const std::uint32_t l = cfg.level_count();
  PyramidOram oram(cfg);
  Rng rng(kSeed);
  bool seq_ok = true, online_ok = true, total_ok = true;
  std::vector<std::uint64_t> at_least(l + 2, 0);
  for (std::uint64_t t = 0; t < ops; ++t) {
    const auto key = static_cast<std::uint32_t>(rng.uniform(cfg.capacity));
    if (rng.next() & 1) {
      oram.write(key, payload_from_u64(t));
    } else {
      oram.read(key);
    }
    const auto& r = oram.last_record();
    seq_ok &= r.rebuilt_level == rebuild_target(cfg, t + 1);
    online_ok &= r.online_buckets == online_cost(cfg, t);
    total_ok &= r.total_buckets == total_cost(cfg, t);
    for (int i = 1; i <= r.rebuilt_level; ++i) ++at_least[static_cast<std::size_t>(i)];
  }
  bool frac_ok = true;
  for (std::uint32_t i = 0; i < l; ++i) {
    // Accesses rebuilding level i+1 or deeper: exactly 1 / (2^i p).
    frac_ok &= at_least[i + 1] * (std::uint64_t{1} << i) * cfg.first_level_size == ops;
  }

  cli::RunConfig bench;
  bench.subcommand = "bench";
  bench.N = cfg.capacity;
  bench.p = cfg.first_level_size;
  bench.ops = ops;
  bench.seed = kSeed;
  bench.format = "csv";
  bench.cdf = true;
  bench.timing = false;
  const auto out = cli::execute(bench);
  std::istringstream in(out.text);
  std::string line;
  std::getline(in, line);
  std::uint64_t cheap = 0;
  bool ordered = true, seen_rebuild = false;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f[1] == "-1") {
      ordered &= !seen_rebuild;
      cheap = std::stoull(f[3]);
    } else {
      seen_rebuild = true;
    }
  }
  const std::uint64_t p = cfg.first_level_size;
  const bool cdf_ok = ordered && cheap * p >= ops * (p - 1);

  report(8, seq_ok && online_ok && total_ok && frac_ok && cdf_ok,
         "schedule and cost exactness over 3N accesses at N=2^10, p=16",
         std::string("rebuild sequence ") + (seq_ok ? "ok" : "differs") + ", online counts " +
             (online_ok ? "ok" : "differ") + ", total counts " + (total_ok ? "ok" : "differ") +
             ", level fractions " + (frac_ok ? "exact" : "off") + ", CDF cheap tier " +
             std::to_string(cheap) + "/" + std::to_string(ops) + " accesses");
}

void bound_calculators() {
  bool agree = true;
  std::uint64_t points = 0;
  for (const auto& [m, n, c, k] : analysis::shipped_bound_matrix()) {
    const auto o = analysis::bucket_overflow_prob_bound(m, n, c);
    const auto s = analysis::expected_spill_bound(m, n, c);
    const auto z = analysis::zigzag_failure_exact(m, n, c, k);
    agree &= o.exact && s.exact && z;
    if (!agree) break;
    agree &= analysis::agree_sig_digits(o.exact->convert_to<double>(), o.floating, 10);
    agree &= analysis::agree_sig_digits(s.exact->convert_to<double>(), s.floating, 10);
    agree &= analysis::agree_sig_digits(z->convert_to<double>(),
                                        analysis::zigzag_failure_bound(m, n, c, k), 10);
    ++points;
  }
  bool edges = true;
  for (std::uint64_t n : {1u, 16u, 1024u}) {
    for (std::uint64_t c : {1u, 2u, 4u, 8u}) {
      for (std::uint64_t m = 0; m <= c; ++m) {
        // C(m, c+1) is an empty binomial for every m <= c.
        const auto s = analysis::expected_spill_bound(m, n, c);
        edges &= s.exact && *s.exact == 0 && s.floating == 0.0 && s.value == 0.0;
        // C(m, c) is empty only below c; at m = c it is n^-c.
        const auto o = analysis::bucket_overflow_prob_bound(m, n, c);
        if (m < c) {
          edges &= o.exact && *o.exact == 0 && o.floating == 0.0;
        } else {
          edges &= o.exact &&
                   *o.exact == analysis::Rational(1, boost::multiprecision::pow(
                                                         boost::multiprecision::cpp_int(n),
                                                         static_cast<unsigned>(c)));
        }
      }
    }
  }
  report(9, agree && edges, "exact and float bound paths agree to 10 digits",
         std::to_string(points) + " matrix points x 3 bounds, m<=c edges " +
             (edges ? "exact" : "wrong"));
}

template <class Fn>
void guarded(int id, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, "criterion raised", e.what());
  }
}

}  // namespace

int main() {
  guarded(1, oracle_equivalence);
  guarded(2, verified_parameters);
  guarded(3, prn_step_count);
  guarded(4, spill_bound);
  guarded(5, per_stage_spill);
  guarded(6, trace_shapes);
  guarded(7, index_uniformity);
  guarded(8, schedule_and_cost);
  guarded(9, bound_calculators);
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
