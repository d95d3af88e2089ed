#include "pyramid/analysis.hpp"

#include <boost/accumulators/accumulators.hpp>
#include <boost/accumulators/statistics/max.hpp>
#include <boost/accumulators/statistics/mean.hpp>
#include <boost/accumulators/statistics/min.hpp>
#include <boost/accumulators/statistics/stats.hpp>
#include <boost/accumulators/statistics/variance.hpp>
#include <cmath>
#include <numbers>

#include "pyramid/config.hpp"
#include "pyramid/errors.hpp"
#include "pyramid/ozht.hpp"
#include "pyramid/prn.hpp"
#include "pyramid/rng.hpp"

namespace pyramid::analysis {

namespace {

using boost::multiprecision::cpp_int;

void check_args(std::uint64_t n, std::uint64_t c) {
  if (n == 0) throw InvalidParameter("bound needs n >= 1");
  if (c == 0) throw InvalidParameter("bound needs c >= 1");
}

cpp_int binomial(std::uint64_t m, std::uint64_t r) {
  cpp_int acc = 1;
  for (std::uint64_t i = 0; i < r; ++i) {
    acc *= m - i;
    acc /= i + 1;
  }
  return acc;
}

std::optional<Rational> ratio_exact(std::uint64_t m, std::uint64_t r,
                                    std::uint64_t n, std::uint64_t c) {
  if (m < r) return Rational(0);
  if (m > kExactMaxM || r > kExactMaxC) return std::nullopt;
  return Rational(binomial(m, r), boost::multiprecision::pow(cpp_int(n), c));
}

// C(m, r) / n^c through logarithms.
double ratio_float(std::uint64_t m, std::uint64_t r, std::uint64_t n,
                   std::uint64_t c) {
  if (m < r) return 0.0;
  long double log_binom = 0.0L;
  if (r <= (1u << 20)) {
    for (std::uint64_t i = 0; i < r; ++i) {
      log_binom += std::log(static_cast<long double>(m - i)) -
                   std::log(static_cast<long double>(i + 1));
    }
  } else {
    log_binom = std::lgamma(static_cast<long double>(m) + 1) -
                std::lgamma(static_cast<long double>(r) + 1) -
                std::lgamma(static_cast<long double>(m - r) + 1);
  }
  const long double log_val =
      log_binom - static_cast<long double>(c) * std::log(static_cast<long double>(n));
  return static_cast<double>(std::exp(log_val));
}

BoundValue combine(std::optional<Rational> exact, double floating) {
  BoundValue b;
  b.floating = floating;
  if (exact) {
    b.value = exact->convert_to<double>();
    b.exact = std::move(exact);
  } else {
    b.value = floating;
    b.note = "inputs above the exact-arithmetic limit; log-space float only";
  }
  return b;
}

}  // namespace

std::optional<Rational> overflow_exact(std::uint64_t m, std::uint64_t n,
                                       std::uint64_t c) {
  check_args(n, c);
  return ratio_exact(m, c, n, c);
}

double overflow_float(std::uint64_t m, std::uint64_t n, std::uint64_t c) {
  check_args(n, c);
  return ratio_float(m, c, n, c);
}

std::optional<Rational> spill_exact(std::uint64_t m, std::uint64_t n,
                                    std::uint64_t c) {
  check_args(n, c);
  return ratio_exact(m, c + 1, n, c);
}

double spill_float(std::uint64_t m, std::uint64_t n, std::uint64_t c) {
  check_args(n, c);
  return ratio_float(m, c + 1, n, c);
}

BoundValue bucket_overflow_prob_bound(std::uint64_t m, std::uint64_t n,
                                      std::uint64_t c) {
  return combine(overflow_exact(m, n, c), overflow_float(m, n, c));
}

BoundValue expected_spill_bound(std::uint64_t m, std::uint64_t n, std::uint64_t c) {
  return combine(spill_exact(m, n, c), spill_float(m, n, c));
}

double zigzag_failure_bound(std::uint64_t m, std::uint64_t n, std::uint64_t c,
                            std::uint64_t k) {
  check_args(n, c);
  if (m == 0) return 0.0;
  const double per_table = ratio_float(m - 1, c, n, c);
  return std::min(1.0, static_cast<double>(m) * std::pow(per_table, static_cast<double>(k)));
}

std::optional<Rational> zigzag_failure_exact(std::uint64_t m, std::uint64_t n,
                                             std::uint64_t c, std::uint64_t k) {
  check_args(n, c);
  if (m == 0) return Rational(0);
  if (k > kExactMaxK) return std::nullopt;
  const auto per_table = ratio_exact(m - 1, c, n, c);
  if (!per_table) return std::nullopt;
  Rational r(boost::multiprecision::pow(boost::multiprecision::numerator(*per_table),
                                        static_cast<unsigned>(k)),
             boost::multiprecision::pow(boost::multiprecision::denominator(*per_table),
                                        static_cast<unsigned>(k)));
  r *= m;
  return r > 1 ? Rational(1) : r;
}

std::vector<BoundParams> shipped_bound_matrix() {
  std::vector<BoundParams> out;
  for (std::uint64_t n : {16u, 256u, 1024u, 1u << 14}) {
    for (std::uint64_t c : {1u, 2u, 4u, 8u}) {
      for (std::uint64_t m : {n / 2, n, 2 * n, 4 * n}) {
        out.push_back({m, n, c, default_k(static_cast<std::uint32_t>(n))});
      }
    }
  }
  return out;
}

double later_table_arrival_bound(std::uint64_t n) {
  return static_cast<double>(n) / (2.0 * std::numbers::e);
}

std::uint32_t sufficient_tables(std::uint64_t n) {
  if (n < 4) return 1;
  const double v = std::ceil(std::log2(std::log2(static_cast<double>(n))));
  return static_cast<std::uint32_t>(std::max(1.0, v));
}

bool agree_sig_digits(double a, double b, int digits) {
  if (a == b) return true;
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= scale * std::pow(10.0, -digits);
}

SpillStats SpillStats::from_samples(const std::vector<double>& xs) {
  namespace acc = boost::accumulators;
  acc::accumulator_set<double, acc::stats<acc::tag::mean, acc::tag::variance,
                                          acc::tag::min, acc::tag::max>>
      a;
  for (double x : xs) a(x);
  SpillStats s;
  s.trials = xs.size();
  if (xs.empty()) return s;
  s.mean = acc::mean(a);
  s.min = acc::min(a);
  s.max = acc::max(a);
  if (xs.size() > 1) {
    const double n = static_cast<double>(xs.size());
    s.variance = acc::variance(a) * n / (n - 1.0);
    s.stderr_ = std::sqrt(s.variance / n);
  }
  return s;
}

nlohmann::json to_json(const SpillStats& s) {
  return {{"trials", s.trials}, {"mean", s.mean},   {"variance", s.variance},
          {"stderr", s.stderr_}, {"min", s.min},     {"max", s.max}};
}

SpillStats mc_throw_spill(std::uint64_t m, std::uint64_t n, std::uint64_t c,
                          std::uint64_t trials, std::uint64_t seed,
                          unsigned workers) {
  if (n == 0) throw InvalidParameter("throw needs n >= 1");
  if (trials == 0) throw InvalidParameter("need at least one trial");
  std::vector<double> samples(trials);
  for_trials(trials, workers, [&](std::uint64_t i) {
    Rng rng = Rng::substream(seed, i);
    std::vector<std::uint32_t> bins(n, 0);
    for (std::uint64_t b = 0; b < m; ++b) ++bins[rng.uniform(n)];
    std::uint64_t spill = 0;
    for (auto load : bins) spill += load > c ? load - c : 0;
    samples[i] = static_cast<double>(spill);
  });
  return SpillStats::from_samples(samples);
}

PrnSpillReport mc_prn_stage_spill(std::uint32_t n, std::uint32_t c, double load,
                                  std::uint64_t trials, std::uint64_t seed,
                                  unsigned workers) {
  if (!is_power_of_two(n) || n < 2) {
    throw InvalidParameter("routing needs a power-of-two n >= 2");
  }
  if (c == 0) throw InvalidParameter("routing needs c >= 1");
  if (!(load >= 0.0) || load > static_cast<double>(c)) {
    throw InvalidParameter("load must lie in [0, c]");
  }
  if (trials == 0) throw InvalidParameter("need at least one trial");
  const unsigned stages = static_cast<unsigned>(std::countr_zero(n));
  const auto m = static_cast<std::uint64_t>(std::llround(load * n));
  std::vector<std::vector<double>> stage_samples(stages, std::vector<double>(trials));
  std::vector<double> total(trials), thrown(trials), live(trials);
  std::vector<std::uint64_t> reparts(trials);
  for_trials(trials, workers, [&](std::uint64_t i) {
    Rng rng = Rng::substream(seed, i);
    prn::RoutingTable table(n, c);
    std::vector<std::uint32_t> fill(n, 0);
    std::uint64_t placed = 0;
    for (std::uint64_t e = 0; e < m; ++e) {
      const auto b = static_cast<std::uint32_t>(rng.uniform(n));
      const auto dest = static_cast<std::uint32_t>(rng.uniform(n));
      if (fill[b] == c) continue;
      auto& rs = table.bucket(b)[fill[b]++];
      rs.slot = Slot::real(static_cast<std::uint32_t>(e), Payload{});
      rs.dest = dest;
      ++placed;
    }
    const auto stats = prn::route(table, rng, nullptr, Region::table_of(1, 0));
    for (unsigned s = 0; s < stages; ++s) {
      stage_samples[s][i] = static_cast<double>(stats.spills_per_stage[s]);
    }
    total[i] = static_cast<double>(stats.total_spills());
    reparts[i] = stats.repartitions;
    std::fill(fill.begin(), fill.end(), 0);
    std::uint64_t spill = 0;
    for (std::uint64_t e = 0; e < placed; ++e) {
      const auto b = rng.uniform(n);
      if (fill[b] == c) {
        ++spill;
      } else {
        ++fill[b];
      }
    }
    thrown[i] = static_cast<double>(spill);
    live[i] = static_cast<double>(placed);
  });
  PrnSpillReport r;
  for (auto& s : stage_samples) r.per_stage.push_back(SpillStats::from_samples(s));
  r.total = SpillStats::from_samples(total);
  r.throw_spill = SpillStats::from_samples(thrown);
  r.live = SpillStats::from_samples(live);
  r.repartitions_per_trial = reparts.empty() ? 0 : reparts.front();
  r.aggregate_ratio =
      r.throw_spill.mean > 0.0 ? r.total.mean / r.throw_spill.mean : 0.0;
  return r;
}

nlohmann::json to_json(const PrnSpillReport& r) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.per_stage) stages.push_back(to_json(s));
  return {{"per_stage", stages},
          {"total", to_json(r.total)},
          {"throw_spill", to_json(r.throw_spill)},
          {"live", to_json(r.live)},
          {"repartitions_per_trial", r.repartitions_per_trial},
          {"aggregate_ratio", r.aggregate_ratio}};
}

bool DecayReport::pass() const {
  return third_table_within_bound && zero_beyond_sufficient;
}

DecayReport decay_check(std::uint32_t n, std::uint32_t c, std::uint32_t k,
                        std::uint64_t trials, std::uint64_t seed,
                        unsigned workers) {
  if (trials == 0) throw InvalidParameter("need at least one trial");
  std::vector<ozht::BuildReport> reports(trials);
  for_trials(trials, workers, [&](std::uint64_t i) {
    Rng rng = Rng::substream(seed, i);
    std::vector<Slot> elems;
    elems.reserve(n);
    for (std::uint32_t key = 0; key < n; ++key) {
      elems.push_back(Slot::real(key, payload_from_u64(key)));
    }
    const HashFamily fam(mix64(seed ^ mix64(i + 1)));
    reports[i] = ozht::oblivious_build(elems, n, k, c, fam, 1, rng, nullptr).report;
  });
  DecayReport r;
  r.n = n;
  r.c = c;
  r.k = k;
  r.trials = trials;
  r.mean_arrivals.assign(k, 0.0);
  r.mean_occupancy.assign(k, 0.0);
  r.arrival_bound = later_table_arrival_bound(n);
  r.preconditions_hold = n >= 1024;
  const std::uint32_t enough = sufficient_tables(n);
  for (const auto& rep : reports) {
    r.failures += !rep.success;
    bool monotone = true;
    bool late = false;
    for (std::uint32_t j = 0; j < k; ++j) {
      r.mean_arrivals[j] += static_cast<double>(rep.arrivals_per_table[j]);
      r.mean_occupancy[j] += static_cast<double>(rep.occupancy_per_table[j]);
      if (j > 0 && rep.arrivals_per_table[j] > rep.arrivals_per_table[j - 1]) {
        monotone = false;
      }
      if (j >= 2 && rep.occupancy_per_table[j] > 0) late = true;
      if (j >= enough && rep.arrivals_per_table[j] > 0) r.zero_beyond_sufficient = false;
    }
    r.monotone_trials += monotone;
    r.late_table_nonempty += late;
  }
  for (std::uint32_t j = 0; j < k; ++j) {
    r.mean_arrivals[j] /= static_cast<double>(trials);
    r.mean_occupancy[j] /= static_cast<double>(trials);
  }
  if (k >= 3) r.third_table_within_bound = r.mean_arrivals[2] <= r.arrival_bound;
  return r;
}

nlohmann::json to_json(const DecayReport& r) {
  return {{"n", r.n},
          {"c", r.c},
          {"k", r.k},
          {"trials", r.trials},
          {"mean_arrivals", r.mean_arrivals},
          {"mean_occupancy", r.mean_occupancy},
          {"failures", r.failures},
          {"monotone_trials", r.monotone_trials},
          {"late_table_nonempty", r.late_table_nonempty},
          {"arrival_bound", r.arrival_bound},
          {"preconditions_hold", r.preconditions_hold},
          {"third_table_within_bound", r.third_table_within_bound},
          {"zero_beyond_sufficient", r.zero_beyond_sufficient},
          {"pass", r.pass()}};
}

CostModel cost_model(std::uint64_t N, std::uint32_t p, std::uint32_t k,
                     std::uint32_t c) {
  PyramidConfig cfg;
  cfg.capacity = N;
  cfg.first_level_size = p;
  cfg.k_override = k;
  cfg.c = c;
  cfg.validate();
  CostModel m;
  m.online_worst = p;
  for (const auto& lp : cfg.levels()) m.online_worst += lp.k;
  m.online_min = p + cfg.level(cfg.level_count()).k;
  m.period_total = period_cost(cfg);
  m.amortized = static_cast<double>(m.period_total) / static_cast<double>(N);
  return m;
}

BoundReport make_report(nlohmann::json params, double bound, const SpillStats& mc) {
  BoundReport r;
  r.params = std::move(params);
  r.bound = bound;
  r.mc_mean = mc.mean;
  r.mc_stderr = mc.stderr_;
  r.trials = mc.trials;
  r.verdict = mc.mean <= bound + 3.0 * mc.stderr_;
  return r;
}

nlohmann::json to_json(const BoundReport& r) {
  return {{"params", r.params},   {"bound", r.bound},   {"mc_mean", r.mc_mean},
          {"mc_stderr", r.mc_stderr}, {"trials", r.trials}, {"verdict", r.verdict}};
}

std::string to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

}  // namespace pyramid::analysis
