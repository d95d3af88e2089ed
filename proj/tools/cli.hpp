#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pyramid/config.hpp"
#include "pyramid/pyramid_oram.hpp"
#include "pyramid/rng.hpp"

namespace pyramid::cli {

enum class ExitCode : int {
  kPass = 0,
  kVerdictFailure = 1,
  kUsage = 2,
  kBuildOrCapacity = 3,
};

enum class WorkloadKind : std::uint8_t {
  kUniform,
  kSequential,
  kZipf,
  kSparseIndexTrace,
};

std::string_view to_string(WorkloadKind w);
WorkloadKind workload_from_string(std::string_view s);

/// Everything one invocation depends on. Fields that a subcommand does not
/// use keep their defaults; 0 in n/m/trials selects the subcommand default.
struct RunConfig {
  std::string subcommand = "bench";
  std::uint64_t N = 1u << 14;
  std::uint32_t p = 64;
  std::uint32_t c = 4;
  std::uint32_t k = 0;
  std::uint64_t ops = 1000;
  WorkloadKind workload = WorkloadKind::kUniform;
  double zipf_theta = 0.99;
  std::string trace_file;
  std::uint64_t seed = 0;
  std::string output = "-";
  std::string format = "json";
  std::string policy = "strict-abort";
  std::uint32_t max_retries = 3;
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  double load = 1.0;
  std::uint64_t trials = 0;
  unsigned parallel_trials = 1;
  bool cdf = false;
  bool timing = true;
  std::int64_t inject_fault_at = -1;
  std::string export_path;

  /// ORAM parameters for bench/verify/trace. Throws InvalidParameter.
  PyramidConfig oram_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Throws InvalidParameter on unknown subcommands, workloads or formats and
/// on missing or mistyped fields.
RunConfig run_config_from_json(const nlohmann::json& j);

struct Request {
  std::uint32_t key = 0;
  Op op = Op::kRead;
};

/// Deterministic request stream. Keys of the generated workloads lie in
/// [0, N); the trace workload replays a file of `key` or `key,r|w` lines.
class Workload {
 public:
  Workload(const RunConfig& cfg, std::uint64_t seed);
  Request next();

 private:
  WorkloadKind kind_;
  std::uint64_t N_;
  std::uint64_t i_ = 0;
  Rng rng_;
  std::vector<double> zipf_cdf_;
  std::vector<Request> replay_;
};

/// Parses `args` (without the program name), runs one subcommand and writes
/// its report to cfg.output (stdout goes to `out`). Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration and returns the report text and the
/// exit code. Errors propagate as exceptions.
struct RunResult {
  std::string text;
  ExitCode code = ExitCode::kPass;
  /// One-line diagnostic for stderr; empty when there is nothing to say.
  std::string message;
};
RunResult execute(const RunConfig& cfg);

/// Checks a JSON report against the documented schema of `name`
/// (run_config, bench, verify, zht, prn, bounds, trace). Returns an empty
/// string when valid, otherwise the first violation.
std::string validate_json(std::string_view name, const nlohmann::json& doc);

/// Checks CSV output of bench: per-access rows or, with `cdf`, the CDF rows.
std::string validate_bench_csv(std::string_view text, bool cdf);

inline constexpr std::string_view kBenchHeader =
    "op_index,found,rebuilt_level,online_buckets,total_buckets,wall_ns";
inline constexpr std::string_view kCdfHeader =
    "total_buckets,rebuilt_level,count,cumulative_count,cumulative_fraction";

}  // namespace pyramid::cli
