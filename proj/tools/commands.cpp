#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "cli.hpp"
#include "pyramid/analysis.hpp"
#include "pyramid/errors.hpp"
#include "pyramid/prn.hpp"
#include "pyramid/simulate.hpp"
#include "pyramid/trace.hpp"

namespace pyramid::cli {

namespace {

using nlohmann::json;

std::string fixed9(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", x);
  return buf;
}

json bound_json(const analysis::BoundValue& b) {
  return {{"exact", b.exact ? json(analysis::to_string(*b.exact)) : json(nullptr)},
          {"float", b.floating},
          {"value", b.value},
          {"note", b.note}};
}

std::string finish_json(std::string_view schema, const json& doc) {
  const std::string e = validate_json(schema, doc);
  if (!e.empty()) throw std::logic_error("report failed schema check: " + e);
  return doc.dump(2) + "\n";
}

ExitCode verdict_code(bool verdict) {
  return verdict ? ExitCode::kPass : ExitCode::kVerdictFailure;
}

// ---------------------------------------------------------------- bench

struct TimedRecord {
  AccessRecord rec;
  std::uint64_t wall_ns = 0;
};

RunResult cmd_bench(const RunConfig& cfg) {
  const PyramidConfig oc = cfg.oram_config();
  PyramidOram oram(oc);
  Workload workload(cfg, cfg.seed);
  Rng values = Rng::substream(cfg.seed, 2);
  std::vector<TimedRecord> rows;
  rows.reserve(cfg.ops);
  for (std::uint64_t i = 0; i < cfg.ops; ++i) {
    const Request req = workload.next();
    std::optional<Payload> v;
    if (req.op == Op::kWrite) v = payload_from_u64(values.next());
    const auto t0 = std::chrono::steady_clock::now();
    oram.access(req.key, req.op, v);
    const auto t1 = std::chrono::steady_clock::now();
    TimedRecord r{oram.last_record(), 0};
    r.rec.op_index = i;
    if (cfg.timing) {
      r.wall_ns = static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    }
    rows.push_back(r);
  }

  struct Tier {
    std::uint64_t total;
    int level;
    std::uint64_t count;
    std::uint64_t cumulative;
  };
  std::vector<Tier> cdf;
  if (cfg.cdf) {
    std::map<std::pair<std::uint64_t, int>, std::uint64_t> counts;
    for (const auto& r : rows) ++counts[{r.rec.total_buckets, r.rec.rebuilt_level}];
    std::uint64_t cumulative = 0;
    for (const auto& [key, count] : counts) {
      cumulative += count;
      cdf.push_back({key.first, key.second, count, cumulative});
    }
  }
  const double ops = static_cast<double>(std::max<std::uint64_t>(cfg.ops, 1));

  if (cfg.format == "csv") {
    std::ostringstream os;
    if (cfg.cdf) {
      os << kCdfHeader << '\n';
      for (const auto& t : cdf) {
        os << t.total << ',' << t.level << ',' << t.count << ',' << t.cumulative << ','
           << fixed9(static_cast<double>(t.cumulative) / ops) << '\n';
      }
    } else {
      os << kBenchHeader << '\n';
      for (const auto& r : rows) {
        os << r.rec.op_index << ',' << (r.rec.found ? 1 : 0) << ','
           << r.rec.rebuilt_level << ',' << r.rec.online_buckets << ','
           << r.rec.total_buckets << ',' << r.wall_ns << '\n';
      }
    }
    std::string text = os.str();
    const std::string e = validate_bench_csv(text, cfg.cdf);
    if (!e.empty()) throw std::logic_error("bench CSV failed schema check: " + e);
    return {std::move(text), ExitCode::kPass, {}};
  }

  json doc = {{"config", to_json(cfg)}, {"oram", config_to_json(oc)}, {"ops", cfg.ops}};
  if (cfg.cdf) {
    json arr = json::array();
    for (const auto& t : cdf) {
      arr.push_back({{"total_buckets", t.total},
                     {"rebuilt_level", t.level},
                     {"count", t.count},
                     {"cumulative_count", t.cumulative},
                     {"cumulative_fraction", static_cast<double>(t.cumulative) / ops}});
    }
    doc["cdf"] = std::move(arr);
  } else {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"op_index", r.rec.op_index},
                     {"found", r.rec.found},
                     {"rebuilt_level", r.rec.rebuilt_level},
                     {"online_buckets", r.rec.online_buckets},
                     {"total_buckets", r.rec.total_buckets},
                     {"wall_ns", r.wall_ns}});
    }
    doc["records"] = std::move(arr);
  }
  return {finish_json("bench", doc), ExitCode::kPass, {}};
}

// ---------------------------------------------------------------- verify

RunResult cmd_verify(const RunConfig& cfg) {
  const PyramidConfig oc = cfg.oram_config();
  PyramidOram oram(oc);
  Workload workload(cfg, cfg.seed);
  Rng values = Rng::substream(cfg.seed, 2);
  std::unordered_map<std::uint32_t, Payload> reference;
  std::uint64_t mismatches = 0;
  std::optional<std::uint64_t> first;
  auto check = [&](std::uint64_t index, std::uint32_t key,
                   const std::optional<Payload>& got) {
    const auto it = reference.find(key);
    const bool ok = it == reference.end() ? !got.has_value()
                                          : (got.has_value() && *got == it->second);
    if (!ok) {
      ++mismatches;
      if (!first) first = index;
    }
  };

  const bool want_fault = cfg.inject_fault_at >= 0;
  std::optional<std::uint64_t> fault_at;
  std::optional<std::uint32_t> fault_key;
  for (std::uint64_t i = 0; i < cfg.ops; ++i) {
    const Request req = workload.next();
    std::optional<Payload> v;
    if (req.op == Op::kWrite) v = payload_from_u64(values.next());
    const auto got = oram.access(req.key, req.op, v);
    check(i, req.key, got);
    if (v) reference[req.key] = *v;
    if (want_fault && !fault_at && i >= static_cast<std::uint64_t>(cfg.inject_fault_at) &&
        oram.inject_fault(req.key)) {
      fault_at = i;
      fault_key = req.key;
    }
  }

  // Every live key is read back once at the end, so a corrupted element is
  // caught even if the workload never touches it again.
  std::vector<std::uint32_t> keys;
  keys.reserve(reference.size());
  for (const auto& kv : reference) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  for (std::size_t j = 0; j < keys.size(); ++j) {
    check(cfg.ops + j, keys[j], oram.read(keys[j]));
  }
  const std::string structure = oram.validate();
  const bool verdict = mismatches == 0 && structure.empty();

  json fault = nullptr;
  if (want_fault) {
    fault = {{"requested_at", cfg.inject_fault_at},
             {"applied_at", fault_at ? json(*fault_at) : json(nullptr)},
             {"key", fault_key ? json(*fault_key) : json(nullptr)}};
  }
  json doc = {{"config", to_json(cfg)},
              {"ops", cfg.ops},
              {"audit_reads", keys.size()},
              {"mismatches", mismatches},
              {"first_mismatch", first ? json(*first) : json(nullptr)},
              {"fault", fault},
              {"structure", structure},
              {"verdict", verdict}};
  RunResult out{finish_json("verify", doc), verdict_code(verdict), {}};
  if (first) {
    out.message = "verify: first mismatch at op " + std::to_string(*first);
  } else if (!structure.empty()) {
    out.message = "verify: " + structure;
  }
  return out;
}

// ---------------------------------------------------------------- zht

RunResult cmd_zht(const RunConfig& cfg) {
  const std::uint32_t n = cfg.n ? cfg.n : 2048;
  if (!is_power_of_two(n) || n < 2) {
    throw InvalidParameter("zht needs a power-of-two n >= 2");
  }
  const std::uint32_t k = cfg.k ? cfg.k : default_k(n);
  const std::uint64_t trials = cfg.trials ? cfg.trials : 100;
  const auto r = analysis::decay_check(n, cfg.c, k, trials, cfg.seed, cfg.parallel_trials);
  const bool verdict = r.failures == 0 && r.late_table_nonempty == 0 && r.pass();
  json doc = analysis::to_json(r);
  doc["config"] = to_json(cfg);
  doc["verdict"] = verdict;
  return {finish_json("zht", doc), verdict_code(verdict), {}};
}

// ---------------------------------------------------------------- prn

RunResult cmd_prn(const RunConfig& cfg) {
  const std::uint32_t n = cfg.n ? cfg.n : 8;
  if (!is_power_of_two(n) || n < 2) {
    throw InvalidParameter("prn needs a power-of-two n >= 2");
  }
  if (cfg.c == 0) throw InvalidParameter("prn needs c >= 1");
  const std::uint64_t trials = cfg.trials ? cfg.trials : 1000;

  // One instrumented pass over a loaded table for the exact step count.
  Rng rng = Rng::substream(cfg.seed, 0);
  prn::RoutingTable table(n, cfg.c);
  const std::uint64_t cells = static_cast<std::uint64_t>(n) * cfg.c;
  const auto live = std::min<std::uint64_t>(
      cells, static_cast<std::uint64_t>(std::llround(cfg.load * n)));
  auto slots = table.slots();
  for (std::uint64_t i = 0; i < cells; ++i) {
    if (i < live) {
      slots[i].slot = Slot::real(static_cast<std::uint32_t>(i), Payload{});
      slots[i].dest = random_bucket(rng, n);
    } else {
      slots[i].slot = Slot::dummy();
    }
  }
  TraceRecorder rec(false);
  const auto stats = prn::route(table, rng, &rec, Region::table_of(1, 0));
  const std::uint64_t expected =
      static_cast<std::uint64_t>(n / 2) * static_cast<std::uint64_t>(std::countr_zero(n));

  const auto spill =
      analysis::mc_prn_stage_spill(n, cfg.c, cfg.load, trials, cfg.seed, cfg.parallel_trials);
  bool verdict = stats.repartitions == expected && rec.count() == 2 * expected;
  json stages = json::array();
  for (std::size_t s = 0; s < spill.per_stage.size(); ++s) {
    const auto& st = spill.per_stage[s];
    const double limit =
        spill.throw_spill.mean + 3 * (st.stderr_ + spill.throw_spill.stderr_);
    const bool pass = st.mean <= limit;
    verdict &= pass;
    stages.push_back({{"stage", s + 1},
                      {"mean", st.mean},
                      {"stderr", st.stderr_},
                      {"limit", limit},
                      {"pass", pass}});
  }
  json doc = {{"config", to_json(cfg)},
              {"n", n},
              {"c", cfg.c},
              {"load", cfg.load},
              {"repartitions", stats.repartitions},
              {"expected_repartitions", expected},
              {"spill", analysis::to_json(spill)},
              {"stages", stages},
              {"verdict", verdict}};
  return {finish_json("prn", doc), verdict_code(verdict), {}};
}

// ---------------------------------------------------------------- bounds

RunResult cmd_bounds(const RunConfig& cfg) {
  const std::uint64_t n = cfg.n ? cfg.n : 1024;
  const std::uint64_t m = cfg.m ? cfg.m : 1024;
  const std::uint64_t c = cfg.c;
  const std::uint64_t trials = cfg.trials ? cfg.trials : 10000;
  std::uint64_t k = cfg.k;
  if (k == 0) {
    k = (is_power_of_two(n) && n >= 2 && n <= (1ull << 31))
            ? default_k(static_cast<std::uint32_t>(n))
            : 2;
  }
  const auto overflow = analysis::bucket_overflow_prob_bound(m, n, c);
  const auto spill = analysis::expected_spill_bound(m, n, c);
  const auto mc = analysis::mc_throw_spill(m, n, c, trials, cfg.seed, cfg.parallel_trials);
  const auto report =
      analysis::make_report({{"m", m}, {"n", n}, {"c", c}}, spill.value, mc);
  json doc = {{"config", to_json(cfg)},
              {"overflow_prob", bound_json(overflow)},
              {"expected_spill", bound_json(spill)},
              {"zigzag_failure", analysis::zigzag_failure_bound(m, n, c, k)},
              {"later_table_arrivals", analysis::later_table_arrival_bound(n)},
              {"sufficient_tables", analysis::sufficient_tables(n)},
              {"report", analysis::to_json(report)}};
  return {finish_json("bounds", doc), verdict_code(report.verdict), {}};
}

// ---------------------------------------------------------------- trace

RunResult cmd_trace(const RunConfig& cfg) {
  const PyramidConfig oc = cfg.oram_config();
  PyramidConfig shadow_cfg = oc;
  shadow_cfg.seed = oc.seed + 1;
  PyramidOram a(oc);
  PyramidOram b(shadow_cfg);
  RunConfig shadow_run = cfg;
  shadow_run.seed = cfg.seed + 1;
  Workload wa(cfg, cfg.seed);
  Workload wb(shadow_run, shadow_run.seed);
  Rng values = Rng::substream(cfg.seed, 2);
  Rng sim_rng = Rng::substream(cfg.seed, 3);

  std::ofstream export_file;
  if (!cfg.export_path.empty()) {
    export_file.open(cfg.export_path);
    if (!export_file) throw InvalidParameter("cannot open export file: " + cfg.export_path);
  }

  const std::uint32_t l = oc.level_count();
  std::vector<std::vector<std::uint64_t>> hist(l + 1);
  for (std::uint32_t i = 1; i <= l; ++i) hist[i].assign(oc.level(i).n, 0);

  TraceRecorder ra, rb;
  std::optional<std::uint64_t> shape_mismatch, sim_mismatch;
  std::uint64_t events = 0, online_events = 0;
  for (std::uint64_t t = 0; t < cfg.ops; ++t) {
    ra.clear();
    rb.clear();
    const Request qa = wa.next();
    const Request qb = wb.next();
    std::optional<Payload> va, vb;
    if (qa.op == Op::kWrite) va = payload_from_u64(values.next());
    if (qb.op == Op::kWrite) vb = payload_from_u64(~values.next());
    a.access(qa.key, qa.op, va, &ra);
    b.access(qb.key, qb.op, vb, &rb);

    const auto sa = shape_bytes(ra.shape());
    if (!shape_mismatch && sa != shape_bytes(rb.shape())) shape_mismatch = t;
    const auto sim = sim::sim_access(oc, t, sim_rng);
    if (!sim_mismatch && sa != shape_bytes(shape(sim))) sim_mismatch = t;

    const auto evs = ra.events();
    events += evs.size();
    const std::uint64_t online = a.last_record().online_buckets;
    online_events += online;
    for (std::uint64_t e = 0; e < online; ++e) {
      const TraceEvent& ev = evs[e];
      if (ev.region.kind == RegionKind::kTable) ++hist[ev.region.level][ev.index];
    }
    if (export_file.is_open()) export_csv(export_file, evs);
  }

  json levels = json::array();
  std::uint64_t tested = 0;
  bool all_pass = true;
  for (std::uint32_t i = 1; i <= l; ++i) {
    std::uint64_t total = 0;
    for (auto v : hist[i]) total += v;
    json entry = {{"level", i},
                  {"buckets", hist[i].size()},
                  {"events", total},
                  {"tested", false}};
    if (total >= 5 * hist[i].size()) {
      const auto r = chi_square_uniform(hist[i], 0.001);
      entry["tested"] = true;
      entry["statistic"] = r.statistic;
      entry["critical"] = r.critical;
      entry["dof"] = r.dof;
      entry["pass"] = r.pass;
      ++tested;
      all_pass &= r.pass;
    }
    levels.push_back(std::move(entry));
  }
  if (tested == 0) {
    throw InsufficientData("no level received enough online events for a chi-square test");
  }
  const bool verdict = !shape_mismatch && !sim_mismatch && all_pass;
  json doc = {{"config", to_json(cfg)},
              {"accesses", cfg.ops},
              {"events", events},
              {"online_events", online_events},
              {"shape_equal", !shape_mismatch},
              {"first_shape_mismatch", shape_mismatch ? json(*shape_mismatch) : json(nullptr)},
              {"sim_shape_equal", !sim_mismatch},
              {"first_sim_mismatch", sim_mismatch ? json(*sim_mismatch) : json(nullptr)},
              {"levels", levels},
              {"tested_levels", tested},
              {"verdict", verdict}};
  return {finish_json("trace", doc), verdict_code(verdict), {}};
}

}  // namespace

RunResult execute(const RunConfig& cfg) {
  const std::string e = validate_json("run_config", to_json(cfg));
  if (!e.empty()) throw InvalidParameter("invalid run config: " + e);
  if (cfg.subcommand == "bench") return cmd_bench(cfg);
  if (cfg.format != "json") {
    throw InvalidParameter(cfg.subcommand + " only writes JSON reports");
  }
  if (cfg.subcommand == "verify") return cmd_verify(cfg);
  if (cfg.subcommand == "zht") return cmd_zht(cfg);
  if (cfg.subcommand == "prn") return cmd_prn(cfg);
  if (cfg.subcommand == "bounds") return cmd_bounds(cfg);
  if (cfg.subcommand == "trace") return cmd_trace(cfg);
  throw InvalidParameter("unknown subcommand: " + cfg.subcommand);
}

}  // namespace pyramid::cli
