#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "pyramid/errors.hpp"

namespace pyramid::cli {

namespace {

struct Flags {
  RunConfig cfg;
  std::string format;
  std::string workload = "uniform";
  bool no_timing = false;
  bool dump_config = false;
  std::string config_file;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--seed", f.cfg.seed, "Seed of every random stream")
      ->envname("PYRAMID_SEED");
  sub->add_option("-o,--output", f.cfg.output, "Output path, - for stdout");
  sub->add_option("--format", f.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--dump-config", f.dump_config,
                "Print the parsed run configuration as JSON and exit");
}

void add_oram(CLI::App* sub, Flags& f) {
  sub->add_option("--N", f.cfg.N, "ORAM capacity (power of two)");
  sub->add_option("--p", f.cfg.p, "First level size (power of two)");
  sub->add_option("--c", f.cfg.c, "Bucket size");
  sub->add_option("--k", f.cfg.k, "Tables per level, 0 for the per-level default");
  sub->add_option("--ops", f.cfg.ops, "Number of accesses");
  sub->add_option("--workload", f.workload, "uniform, sequential, zipf or sparse-index-trace")
      ->check(CLI::IsMember({"uniform", "sequential", "zipf", "sparse-index-trace"}));
  sub->add_option("--zipf-theta", f.cfg.zipf_theta, "Zipf exponent");
  sub->add_option("--trace-file", f.cfg.trace_file,
                  "Request file for sparse-index-trace: one `key` or `key,r|w` per line");
  sub->add_option("--policy", f.cfg.policy, "Build failure policy")
      ->check(CLI::IsMember({"strict-abort", "retry"}));
  sub->add_option("--max-retries", f.cfg.max_retries, "Retries under the retry policy");
}

void add_trials(CLI::App* sub, Flags& f) {
  sub->add_option("--trials", f.cfg.trials, "Monte Carlo trials, 0 for the default");
  sub->add_option("--parallel-trials", f.cfg.parallel_trials,
                  "Worker threads for the trials")
      ->check(CLI::PositiveNumber);
}

int write_output(const RunConfig& cfg, const std::string& text, std::ostream& out,
                 std::ostream& err) {
  if (cfg.output == "-") {
    out << text;
    out.flush();
    return 0;
  }
  std::ofstream f(cfg.output, std::ios::binary);
  if (!f) {
    err << "cannot open output file: " << cfg.output << '\n';
    return static_cast<int>(ExitCode::kUsage);
  }
  f << text;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pyramid ORAM experiments and benchmarks", "pyramid"};
  app.require_subcommand(1);
  Flags f;

  auto* bench = app.add_subcommand("bench", "Per-access cost records of a workload");
  add_common(bench, f);
  add_oram(bench, f);
  bench->add_flag("--cdf", f.cfg.cdf, "Emit the cumulative distribution of access costs");
  bench->add_flag("--no-timing", f.no_timing, "Write 0 for wall_ns");

  auto* verify = app.add_subcommand("verify", "Random workload against a reference map");
  add_common(verify, f);
  add_oram(verify, f);
  verify->add_option("--inject-fault-at", f.cfg.inject_fault_at,
                     "Flip one payload bit of the key accessed at this op (or the next "
                     "stored one)");

  auto* zht = app.add_subcommand("zht", "Full-load oblivious ZHT builds");
  add_common(zht, f);
  zht->add_option("--n", f.cfg.n, "Buckets per table (power of two)");
  zht->add_option("--k", f.cfg.k, "Tables, 0 for the default");
  zht->add_option("--c", f.cfg.c, "Bucket size");
  add_trials(zht, f);

  auto* prn = app.add_subcommand("prn", "Routing network step count and per-stage spill");
  add_common(prn, f);
  prn->add_option("--n", f.cfg.n, "Buckets (power of two)");
  prn->add_option("--c", f.cfg.c, "Bucket size");
  prn->add_option("--load", f.cfg.load, "Live elements per bucket");
  add_trials(prn, f);

  auto* bounds = app.add_subcommand("bounds", "Spill and overflow bounds, exact and Monte Carlo");
  add_common(bounds, f);
  bounds->add_option("--m", f.cfg.m, "Thrown elements");
  bounds->add_option("--n", f.cfg.n, "Buckets");
  bounds->add_option("--c", f.cfg.c, "Bucket size");
  bounds->add_option("--k", f.cfg.k, "Tables for the zigzag failure bound");
  add_trials(bounds, f);

  auto* trace = app.add_subcommand("trace", "Trace shape and bucket-index uniformity checks");
  add_common(trace, f);
  add_oram(trace, f);
  trace->add_option("--export", f.cfg.export_path, "Write the trace as CSV");

  auto* replay = app.add_subcommand("run", "Run a configuration written by --dump-config");
  replay->add_option("config", f.config_file, "RunConfig JSON file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  RunConfig cfg;
  try {
    if (replay->parsed()) {
      std::ifstream in(f.config_file);
      if (!in) throw InvalidParameter("cannot open config file: " + f.config_file);
      cfg = run_config_from_json(nlohmann::json::parse(in));
    } else {
      cfg = f.cfg;
      cfg.subcommand = app.get_subcommands().front()->get_name();
      cfg.workload = workload_from_string(f.workload);
      cfg.timing = !f.no_timing;
      cfg.format = !f.format.empty() ? f.format : (cfg.subcommand == "bench" ? "csv" : "json");
    }
    if (f.dump_config) {
      out << to_json(cfg).dump(2) << '\n';
      return 0;
    }
    const RunResult r = execute(cfg);
    if (const int w = write_output(cfg, r.text, out, err); w != 0) return w;
    if (!r.message.empty()) err << r.message << '\n';
    return static_cast<int>(r.code);
  } catch (const CapacityExceeded& e) {
    err << "capacity exceeded: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kBuildOrCapacity);
  } catch (const BuildFailure& e) {
    err << "build failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kBuildOrCapacity);
  } catch (const CounterExhausted& e) {
    err << "counter exhausted: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kBuildOrCapacity);
  } catch (const std::invalid_argument& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  } catch (const nlohmann::json::exception& e) {
    err << "invalid config file: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kVerdictFailure);
  }
}

}  // namespace pyramid::cli
