#include <array>

#include "cli.hpp"
#include "pyramid/errors.hpp"

namespace pyramid::cli {

namespace {

constexpr std::array<std::pair<WorkloadKind, std::string_view>, 4> kWorkloads{{
    {WorkloadKind::kUniform, "uniform"},
    {WorkloadKind::kSequential, "sequential"},
    {WorkloadKind::kZipf, "zipf"},
    {WorkloadKind::kSparseIndexTrace, "sparse-index-trace"},
}};

constexpr std::array<std::string_view, 6> kSubcommands{
    "bench", "verify", "zht", "prn", "bounds", "trace"};

template <class T>
T field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) {
    throw InvalidParameter(std::string("run config lacks field ") + name);
  }
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidParameter(std::string("run config field has the wrong type: ") + name);
  }
}

}  // namespace

std::string_view to_string(WorkloadKind w) {
  for (const auto& [kind, name] : kWorkloads) {
    if (kind == w) return name;
  }
  return "uniform";
}

WorkloadKind workload_from_string(std::string_view s) {
  for (const auto& [kind, name] : kWorkloads) {
    if (name == s) return kind;
  }
  throw InvalidParameter("unknown workload: " + std::string(s));
}

PyramidConfig RunConfig::oram_config() const {
  PyramidConfig cfg;
  cfg.capacity = N;
  cfg.first_level_size = p;
  cfg.c = c;
  cfg.k_override = k;
  cfg.seed = seed;
  cfg.policy = failure_policy_from_string(policy);
  cfg.max_retries = max_retries;
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"subcommand", cfg.subcommand},
          {"N", cfg.N},
          {"p", cfg.p},
          {"c", cfg.c},
          {"k", cfg.k},
          {"ops", cfg.ops},
          {"workload", std::string(to_string(cfg.workload))},
          {"zipf_theta", cfg.zipf_theta},
          {"trace_file", cfg.trace_file},
          {"seed", cfg.seed},
          {"output", cfg.output},
          {"format", cfg.format},
          {"policy", cfg.policy},
          {"max_retries", cfg.max_retries},
          {"n", cfg.n},
          {"m", cfg.m},
          {"load", cfg.load},
          {"trials", cfg.trials},
          {"parallel_trials", cfg.parallel_trials},
          {"cdf", cfg.cdf},
          {"timing", cfg.timing},
          {"inject_fault_at", cfg.inject_fault_at},
          {"export", cfg.export_path}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidParameter("run config must be a JSON object");
  RunConfig cfg;
  cfg.subcommand = field<std::string>(j, "subcommand");
  bool known = false;
  for (auto s : kSubcommands) known |= s == cfg.subcommand;
  if (!known) throw InvalidParameter("unknown subcommand: " + cfg.subcommand);
  cfg.N = field<std::uint64_t>(j, "N");
  cfg.p = field<std::uint32_t>(j, "p");
  cfg.c = field<std::uint32_t>(j, "c");
  cfg.k = field<std::uint32_t>(j, "k");
  cfg.ops = field<std::uint64_t>(j, "ops");
  cfg.workload = workload_from_string(field<std::string>(j, "workload"));
  cfg.zipf_theta = field<double>(j, "zipf_theta");
  cfg.trace_file = field<std::string>(j, "trace_file");
  cfg.seed = field<std::uint64_t>(j, "seed");
  cfg.output = field<std::string>(j, "output");
  cfg.format = field<std::string>(j, "format");
  if (cfg.format != "csv" && cfg.format != "json") {
    throw InvalidParameter("format must be csv or json");
  }
  cfg.policy = field<std::string>(j, "policy");
  failure_policy_from_string(cfg.policy);
  cfg.max_retries = field<std::uint32_t>(j, "max_retries");
  cfg.n = field<std::uint32_t>(j, "n");
  cfg.m = field<std::uint64_t>(j, "m");
  cfg.load = field<double>(j, "load");
  cfg.trials = field<std::uint64_t>(j, "trials");
  cfg.parallel_trials = field<unsigned>(j, "parallel_trials");
  cfg.cdf = field<bool>(j, "cdf");
  cfg.timing = field<bool>(j, "timing");
  cfg.inject_fault_at = field<std::int64_t>(j, "inject_fault_at");
  cfg.export_path = field<std::string>(j, "export");
  return cfg;
}

}  // namespace pyramid::cli
