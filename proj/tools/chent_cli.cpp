#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "chent/channel_measures.hpp"
#include "chent/errors.hpp"
#include "chent/io.hpp"
#include "chent/oracle.hpp"
#include "chent/properties.hpp"

using namespace chent;
using nlohmann::json;

namespace {

enum Exit { ok = 0, failed = 1, bad_input = 2, incompatible = 3, optimizer = 4 };

struct UsageError : std::runtime_error {
  int code;
  UsageError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ObjectiveFailure:
    case ErrorCode::NoConvergence:
      return optimizer;
    default:
      return incompatible;
  }
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) s += ' ';
    s += argv[i];
  }
  return s;
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(bad_input, "cannot write " + path);
  out << text;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct ComputeArgs {
  std::string measure, channel, channel2, out;
  std::size_t k = 2, starts = 32, max_iters = 2000;
  std::uint64_t seed = 0;
  double tol = 1e-10;
};

int run_compute(const ComputeArgs& a, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool pair = a.measure == "sc";
  if (pair && a.channel2.empty()) throw UsageError(incompatible, "sc needs --channel2");
  if (!pair && !a.channel2.empty()) throw UsageError(incompatible, a.measure + " takes a single channel");

  const std::string bytes = io::read_file(a.channel);
  const Channel n = io::load_channel(a.channel);
  io::RunReport report;
  report.command = command;
  report.seed = a.seed;
  report.digest = "sha256:" + io::sha256_hex(bytes);
  std::optional<Channel> m;
  if (pair) {
    const std::string bytes2 = io::read_file(a.channel2);
    m = io::load_channel(a.channel2);
    report.digest = "sha256:" + io::sha256_hex(io::sha256_hex(bytes) + io::sha256_hex(bytes2));
  }

  OptimizerConfig cfg;
  cfg.starts = a.starts;
  cfg.seed = a.seed;
  cfg.ftol = a.tol;
  cfg.max_iters = a.max_iters;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(bad_input, e.what());
  }

  std::string headline;
  if (a.measure == "strength") {
    const auto s = strength_value(n, cfg);
    report.results.push_back(io::strength_to_json(s));
    headline = "strength K = " + std::to_string(s.K) + " (upper)";
  } else {
    MeasureResult r;
    if (a.measure == "sc") {
      r = choi_relative_entropy(n, *m, cfg);
    } else if (a.measure == "rr") {
      r = measure_rr(n, default_free_family(n), cfg);
    } else if (a.measure == "rc") {
      r = measure_rc(n, cfg);
    } else {
      r = measure_rkme(n, a.k, cfg);
    }
    report.results.push_back(io::result_to_json(r));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", io::round12(r.value));
    headline = r.measure + " = " + buf + " (" + std::string(to_string(r.bound)) + ")";
  }
  report.wall_ms = elapsed_ms(t0);
  write_out(a.out, io::serialize(report));
  std::cout << headline << "\n";
  return ok;
}

struct CheckArgs {
  std::string suite = "all", out;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  bool nightly = false, fault_sign_flip = false;
};

int run_check(const CheckArgs& a, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteConfig cfg{a.trials, a.seed, a.nightly, a.fault_sign_flip};
  std::vector<PropertyOutcome> outs;
  try {
    outs = run_suite(a.suite, cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadParam) throw UsageError(bad_input, e.what());
    throw;
  }
  io::RunReport report;
  report.command = command;
  report.digest = "suite:" + a.suite;
  report.seed = a.seed;
  for (const auto& o : outs) {
    report.results.push_back(io::property_to_json(o));
    std::printf("%s %-36s margin %.3e  (%zu trials)%s%s\n", o.passed ? "PASS" : "FAIL", o.name.c_str(),
                o.worst_margin, o.trials, o.passed ? "" : "  ", o.passed ? "" : o.detail.c_str());
  }
  report.wall_ms = elapsed_ms(t0);
  write_out(a.out, io::serialize(report));
  return all_passed(outs) ? ok : failed;
}

struct OracleArgs {
  std::string kind, channel, state, out;
  std::size_t steps = 32, k = 2, samples = 1000;
  std::uint64_t seed = 0;
};

int run_oracle(const OracleArgs& a, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  io::RunReport report;
  report.command = command;
  report.seed = a.seed;
  json result = {{"measure", a.kind}};
  std::string headline;
  auto need = [](const std::string& v, const char* flag) {
    if (v.empty()) throw UsageError(bad_input, std::string(flag) + " is required for this oracle");
  };
  try {
    if (a.kind == "grid-rc" || a.kind == "free-floor") {
      need(a.channel, "--channel");
      report.digest = "sha256:" + io::sha256_hex(io::read_file(a.channel));
      const Channel n = io::load_channel(a.channel);
      const double v = a.kind == "grid-rc" ? grid_max_concurrence(n, a.steps)
                                           : sampled_free_distance_floor(n, a.samples, a.seed);
      result["value"] = io::round12(v);
      result["bound"] = a.kind == "grid-rc" ? "lower" : "upper";
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", io::round12(v));
      headline = a.kind + " = " + buf;
    } else {
      need(a.state, "--state");
      report.digest = "sha256:" + io::sha256_hex(io::read_file(a.state));
      const auto check = exhaustive_partition_check(io::load_state(a.state), a.k);
      json parts = json::array();
      for (const auto& v : check.detail) {
        json p = {{"blocks", v.blocks}, {"separable", v.separable}};
        json pur = json::array();
        for (double x : v.block_purities) pur.push_back(io::round12(x));
        p["block_purities"] = std::move(pur);
        parts.push_back(std::move(p));
      }
      result["nonseparable_everywhere"] = check.nonseparable_everywhere;
      result["partitions"] = std::move(parts);
      headline = std::string("partition k=") + std::to_string(a.k) + ": " +
                 (check.nonseparable_everywhere ? "nonseparable in every partition" : "separable in some partition");
    }
  } catch (const Error& e) {
    throw UsageError(bad_input, e.what());
  }
  report.results.push_back(std::move(result));
  report.wall_ms = elapsed_ms(t0);
  write_out(a.out, io::serialize(report));
  std::cout << headline << "\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement measures for quantum channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolVersion);

  ComputeArgs ca;
  auto* compute = app.add_subcommand("compute", "Evaluate a channel measure");
  compute->add_option("--measure", ca.measure, "sc | rr | rc | rkme | strength")
      ->required()
      ->check(CLI::IsMember({"sc", "rr", "rc", "rkme", "strength"}));
  compute->add_option("--channel", ca.channel, "Channel JSON file")->required();
  compute->add_option("--channel2", ca.channel2, "Second channel (sc only)");
  compute->add_option("--k", ca.k, "Partition size for rkme")->check(CLI::Range(2, 64));
  compute->add_option("--starts", ca.starts, "Optimizer starts")->check(CLI::Range(1, 100000));
  compute->add_option("--seed", ca.seed, "Random seed");
  compute->add_option("--tol", ca.tol, "Relative function tolerance")->check(CLI::PositiveNumber);
  compute->add_option("--max-iters", ca.max_iters, "Iterations per start")->check(CLI::Range(1, 10000000));
  compute->add_option("--out", ca.out, "Report JSON file");

  CheckArgs ka;
  auto* check = app.add_subcommand("check", "Run the randomized property suites");
  check->add_option("--suite", ka.suite, "sc | rr | rc | rkme | all")
      ->check(CLI::IsMember({"sc", "rr", "rc", "rkme", "all"}));
  check->add_option("--trials", ka.trials, "Trials per property")->check(CLI::Range(1, 100000));
  check->add_option("--seed", ka.seed, "Random seed");
  check->add_option("--out", ka.out, "Report JSON file");
  check->add_flag("--nightly", ka.nightly, "Include the expensive checks");
  check->add_flag("--fault-sign-flip", ka.fault_sign_flip)->group("");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Run a brute-force reference computation");
  oracle->add_option("--kind", oa.kind, "grid-rc | partition | free-floor")
      ->required()
      ->check(CLI::IsMember({"grid-rc", "partition", "free-floor"}));
  oracle->add_option("--channel", oa.channel, "Channel JSON file");
  oracle->add_option("--state", oa.state, "State JSON file");
  oracle->add_option("--steps", oa.steps, "Grid points per angle");
  oracle->add_option("--k", oa.k, "Partition size");
  oracle->add_option("--samples", oa.samples, "Free channels sampled")->check(CLI::Range(1, 10000000));
  oracle->add_option("--seed", oa.seed, "Random seed");
  oracle->add_option("--out", oa.out, "Report JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : bad_input;
  }

  const std::string cmd = command_line(argc, argv);
  try {
    if (*compute) return run_compute(ca, cmd);
    if (*check) return run_check(ka, cmd);
    return run_oracle(oa, cmd);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const io::InputError& e) {
    std::cerr << "error: malformed input, " << e.what() << "\n";
    return bad_input;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failed;
  }
}
