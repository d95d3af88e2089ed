#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

namespace pyramid::analysis {

using Rational = boost::multiprecision::cpp_rational;

/// Inputs above these sizes skip the exact path.
inline constexpr std::uint64_t kExactMaxM = 1u << 20;
inline constexpr std::uint64_t kExactMaxC = 4096;
inline constexpr std::uint64_t kExactMaxK = 64;

/// A closed-form bound evaluated exactly (when small enough) and in floating
/// point. `value` is the exact result rounded to double when available.
struct BoundValue {
  std::optional<Rational> exact;
  double floating = 0.0;
  double value = 0.0;
  std::string note;
};

/// C(m, c) / n^c: probability that a fixed bucket receives c or more of m
/// uniformly thrown elements is at most this.
BoundValue bucket_overflow_prob_bound(std::uint64_t m, std::uint64_t n,
                                      std::uint64_t c);
/// C(m, c+1) / n^c: expected number of elements that find their bucket full.
BoundValue expected_spill_bound(std::uint64_t m, std::uint64_t n, std::uint64_t c);

std::optional<Rational> overflow_exact(std::uint64_t m, std::uint64_t n,
                                       std::uint64_t c);
double overflow_float(std::uint64_t m, std::uint64_t n, std::uint64_t c);
std::optional<Rational> spill_exact(std::uint64_t m, std::uint64_t n,
                                    std::uint64_t c);
double spill_float(std::uint64_t m, std::uint64_t n, std::uint64_t c);

/// min(1, m * (C(m-1, c) / n^c)^k): union bound on the probability that
/// some of m elements finds every bucket of its k-table zigzag path full
/// (each table's hash is independent of what reached that table).
double zigzag_failure_bound(std::uint64_t m, std::uint64_t n, std::uint64_t c,
                            std::uint64_t k);

std::optional<Rational> zigzag_failure_exact(std::uint64_t m, std::uint64_t n,
                                             std::uint64_t c, std::uint64_t k);

struct BoundParams {
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::uint64_t c = 0;
  std::uint64_t k = 0;
};

/// Parameter grid on which the exact and floating paths are cross-checked:
/// n in {16, 256, 1024, 2^14}, c in {1, 2, 4, 8}, m in {n/2, n, 2n, 4n},
/// k the default table count for n.
std::vector<BoundParams> shipped_bound_matrix();

/// n / (2e): bound on arrivals into the later tables of a zigzag build.
double later_table_arrival_bound(std::uint64_t n);

/// Number of tables sufficient to place all elements: ceil(log2 log2 n).
std::uint32_t sufficient_tables(std::uint64_t n);

/// Whether two doubles agree to `digits` significant digits.
bool agree_sig_digits(double a, double b, int digits);

struct SpillStats {
  std::uint64_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  double stderr_ = 0.0;
  double min = 0.0;
  double max = 0.0;

  static SpillStats from_samples(const std::vector<double>& xs);
};

nlohmann::json to_json(const SpillStats& s);

/// Runs `trials` Monte Carlo trials, trial i seeded from (seed, i), spread
/// over `workers` threads. Results do not depend on `workers`.
template <typename Fn>
void for_trials(std::uint64_t trials, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || trials < 2) {
    for (std::uint64_t i = 0; i < trials; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint64_t i = w; i < trials; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// m balls into n bins of capacity c; per-trial count of balls that overflow.
SpillStats mc_throw_spill(std::uint64_t m, std::uint64_t n, std::uint64_t c,
                          std::uint64_t trials, std::uint64_t seed,
                          unsigned workers = 1);

struct PrnSpillReport {
  std::vector<SpillStats> per_stage;
  SpillStats total;
  /// Fresh single throw of the same live count per trial.
  SpillStats throw_spill;
  SpillStats live;
  std::uint64_t repartitions_per_trial = 0;
  /// total.mean / throw_spill.mean; reported, not asserted.
  double aggregate_ratio = 0.0;
};

/// Per trial: round(load * n) elements are thrown into n buckets of c slots
/// (overflow dropped), given uniform destinations and routed. Each stage's
/// spill is compared with a fresh throw of the same live count.
PrnSpillReport mc_prn_stage_spill(std::uint32_t n, std::uint32_t c, double load,
                                  std::uint64_t trials, std::uint64_t seed,
                                  unsigned workers = 1);

nlohmann::json to_json(const PrnSpillReport& r);

struct DecayReport {
  std::uint32_t n = 0;
  std::uint32_t c = 0;
  std::uint32_t k = 0;
  std::uint64_t trials = 0;
  std::vector<double> mean_arrivals;
  std::vector<double> mean_occupancy;
  std::uint64_t failures = 0;
  /// Trials whose per-table arrivals were non-increasing.
  std::uint64_t monotone_trials = 0;
  /// Builds where any table beyond the second held a real element.
  std::uint64_t late_table_nonempty = 0;
  double arrival_bound = 0.0;
  bool preconditions_hold = false;
  bool third_table_within_bound = true;
  bool zero_beyond_sufficient = true;
  bool pass() const;
};

/// Full-load oblivious builds; arrivals are read from the build reports.
DecayReport decay_check(std::uint32_t n, std::uint32_t c, std::uint32_t k,
                        std::uint64_t trials, std::uint64_t seed,
                        unsigned workers = 1);

nlohmann::json to_json(const DecayReport& r);

struct CostModel {
  /// Online events when every level is present.
  std::uint64_t online_worst = 0;
  /// Online events when only the last level is present.
  std::uint64_t online_min = 0;
  std::uint64_t period_total = 0;
  double amortized = 0.0;
};

/// k = 0 selects the per-level default.
CostModel cost_model(std::uint64_t N, std::uint32_t p, std::uint32_t k,
                     std::uint32_t c);

struct BoundReport {
  nlohmann::json params;
  double bound = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  std::uint64_t trials = 0;
  bool verdict = false;
};

/// verdict = mc_mean <= bound + 3 * mc_stderr.
BoundReport make_report(nlohmann::json params, double bound, const SpillStats& mc);

nlohmann::json to_json(const BoundReport& r);

std::string to_string(const Rational& r);

}  // namespace pyramid::analysis

