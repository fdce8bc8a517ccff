// dfsim: run scenarios, check traces, build reductions and generate inputs.
//
// Exit codes: 0 pass, 1 verdict failure, 2 usage or parse error,
// 3 model violation (refused injection, unreachable re-route, tau breach).

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "dfsim/analysis.hpp"
#include "dfsim/engine.hpp"
#include "dfsim/errors.hpp"
#include "dfsim/feedback.hpp"
#include "dfsim/io.hpp"
#include "dfsim/reduction.hpp"

namespace fs = std::filesystem;
using namespace dfsim;

namespace {

enum Exit : int { kPass = 0, kVerdict = 1, kUsage = 2, kModel = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Writes to `path`, or to stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  std::string out;
  std::optional<Round> horizon;
  std::optional<std::uint64_t> seed;
  std::string policy;
  ProbeParams probe;
};

/// Runs one scenario and writes trace.jsonl, metrics.csv and stability.json
/// into `out` (when given). Returns the summary line.
std::string run_one(const RunArgs& a, int& code) {
  auto config = load_scenario(a.scenario);
  if (a.horizon) config.horizon = *a.horizon;
  if (a.seed) config.seed = *a.seed;
  if (!a.policy.empty()) config.policy = make_policy(a.policy, config.policy.priorities);
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("override makes the scenario invalid: ") + e.what());
  }
  auto trace = run(config);

  std::ostringstream summary;
  summary << config.name << ": horizon " << config.horizon << ", max Q " << trace.max_total() << ", final Q "
          << (trace.rounds.empty() ? 0 : trace.rounds.back().total);
  std::optional<StabilityReport> report;
  try {
    report = probe_stability(trace, a.probe);
    summary << ", " << to_string(report->verdict);
  } catch (const std::invalid_argument& e) {
    summary << ", probe skipped (" << e.what() << ")";
  }
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(trace.digest));
  summary << ", digest " << digest;

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    save_trace(trace, (fs::path(a.out) / "trace.jsonl").string());
    std::ofstream csv(fs::path(a.out) / "metrics.csv", std::ios::binary);
    write_metrics_csv(trace, csv);
    if (report) write_text(fs::path(a.out) / "stability.json", report_json(*report));
  }
  code = kPass;
  return summary.str();
}

void add_probe_flags(CLI::App* cmd, ProbeParams& probe) {
  cmd->add_option("--window", probe.window, "Probe window length W")->check(CLI::PositiveNumber);
  cmd->add_option("--k", probe.k, "Consecutive growing windows required")->check(CLI::PositiveNumber);
  cmd->add_option("--g", probe.g, "Minimum growth per window")->check(CLI::PositiveNumber);
}

// --- check -----------------------------------------------------------------

int cmd_check(const std::string& trace_path, std::string mode, bool exhaustive, const std::string& out) {
  std::transform(mode.begin(), mode.end(), mode.begin(), [](unsigned char c) { return std::tolower(c); });
  auto trace = load_trace(trace_path);
  if (mode == "recovery") {
    auto verdict = validate_recovery(trace);
    emit(out, report_json(trace, verdict));
    return verdict.valid ? kPass : kVerdict;
  }
  IntervalVerdict verdict;
  std::string canonical;
  if (mode == "eq1" || mode == "admissible") {
    canonical = "admissible";
    verdict = check_trace_admissibility(trace);
  } else if (mode == "regular") {
    canonical = "regular";
    verdict = check_trace_regular(trace);
  } else if (mode == "lemma3" || mode == "stall-bound") {
    canonical = "stall-bound";
    verdict = check_trace_stall_bound(trace, exhaustive);
  } else {
    throw UsageError("unknown mode '" + mode + "' (admissible, regular, stall-bound, recovery)");
  }
  emit(out, report_json(trace, verdict, canonical));
  return verdict.holds ? kPass : kVerdict;
}

// --- reduce ----------------------------------------------------------------

int cmd_reduce(const std::string& trace_path, const std::string& policy, const std::string& out) {
  auto trace = load_trace(trace_path);
  // Validate the parameters up front so a bad r is a usage error, not a crash.
  try {
    compute_reduced_params(trace.config.adversary.rate, trace.config.adversary.burstiness,
                           trace.config.adversary.delay, trace.config.tau);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto base = policy.empty() ? trace.config.policy.base : parse_base_policy(policy);
  auto two = build_two_priority_trace(trace);
  auto verdict = verify_reduction(trace, base);
  emit(out, report_json(trace, verdict, two));
  return verdict.holds() ? kPass : kVerdict;
}

// --- batch -----------------------------------------------------------------

int cmd_batch(const std::vector<std::string>& scenarios, const std::string& out, unsigned threads,
              const RunArgs& shared) {
  std::vector<std::string> lines(scenarios.size());
  std::vector<int> codes(scenarios.size(), kPass);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      RunArgs a = shared;
      a.scenario = scenarios[i];
      if (!out.empty()) a.out = (fs::path(out) / fs::path(scenarios[i]).stem()).string();
      try {
        lines[i] = run_one(a, codes[i]);
      } catch (const ScenarioError& e) {
        codes[i] = kModel;
        lines[i] = scenarios[i] + ": model violation: " + e.what();
      } catch (const ParseError& e) {
        codes[i] = kUsage;
        lines[i] = scenarios[i] + ": " + e.what();
      } catch (const std::exception& e) {
        codes[i] = kUsage;
        lines[i] = scenarios[i] + ": " + e.what();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(scenarios.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int worst = kPass;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    std::cout << lines[i] << '\n';
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed-feedback adversarial routing workbench"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario and write its trace");
  run_cmd->add_option("scenario", run_args.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--out", run_args.out, "Output directory");
  run_cmd->add_option("--horizon", run_args.horizon, "Override the horizon");
  run_cmd->add_option("--seed", run_args.seed, "Override the seed");
  run_cmd->add_option("--policy", run_args.policy, "Override the base policy");
  add_probe_flags(run_cmd, run_args.probe);

  std::string check_trace;
  std::string check_mode = "admissible";
  std::string check_out;
  bool exhaustive = false;
  auto* check_cmd = app.add_subcommand("check", "Verify a trace against one condition");
  check_cmd->add_option("trace", check_trace, "Trace file")->required();
  check_cmd->add_option("--mode", check_mode, "admissible (alias eq1) | regular | stall-bound (alias lemma3) | recovery");
  check_cmd->add_flag("--exhaustive", exhaustive, "Enumerate every interval (stall-bound)");
  check_cmd->add_option("--out", check_out, "Report file (default stdout)");

  std::string reduce_trace;
  std::string reduce_policy;
  std::string reduce_out;
  auto* reduce_cmd = app.add_subcommand("reduce", "Build and verify the 2-priority reduction of a trace");
  reduce_cmd->add_option("trace", reduce_trace, "Trace file")->required();
  reduce_cmd->add_option("--policy", reduce_policy, "Base policy for the replay (default: the trace's)");
  reduce_cmd->add_option("--out", reduce_out, "Report file (default stdout)");

  auto* gen_cmd = app.add_subcommand("gen", "Generate a scenario file");
  gen_cmd->require_subcommand(1);
  std::string gen_out;
  RandomScenarioParams rnd;
  std::string rnd_rate = "1/2";
  std::string rnd_policy = "FTG";
  auto* gen_random = gen_cmd->add_subcommand("random", "Random strongly connected scenario");
  gen_random->add_option("--seed", rnd.seed, "Seed");
  gen_random->add_option("--min-nodes", rnd.min_nodes, "Fewest nodes");
  gen_random->add_option("--max-nodes", rnd.max_nodes, "Most nodes");
  gen_random->add_option("--r", rnd_rate, "Injection rate as num/den");
  gen_random->add_option("--b", rnd.burstiness, "Burstiness");
  gen_random->add_option("--delta", rnd.delay, "Feedback delay");
  gen_random->add_option("--tau", rnd.tau, "Most consecutive stalls per queue");
  gen_random->add_option("--tau-prime", rnd.tau_prime, "Most rounds before a failure is notified");
  gen_random->add_option("--policy", rnd_policy, "Base policy");
  gen_random->add_option("--horizon", rnd.horizon, "Horizon");
  gen_random->add_option("--failures", rnd.failures, "Permanent failures")->check(CLI::Range(0, 3));
  gen_random->add_option("--out", gen_out, "Scenario file (default stdout)");

  GadgetParams gadget;
  std::string gadget_policy = "FIFO";
  auto* gen_gadget = gen_cmd->add_subcommand("rerouting-gadget", "Re-routing instability gadget");
  gen_gadget->add_option("--branches", gadget.branches, "Number of branches n");
  gen_gadget->add_option("--burst", gadget.burst, "Packets injected per branch per cycle");
  gen_gadget->add_option("--fail", gadget.fail_duration, "Rounds each outage lasts");
  gen_gadget->add_option("--cycles", gadget.cycles, "Cycles to schedule");
  gen_gadget->add_option("--policy", gadget_policy, "Base policy");
  gen_gadget->add_option("--out", gen_out, "Scenario file (default stdout)");

  std::vector<std::string> batch_files;
  std::string batch_out;
  unsigned batch_threads = std::max(1u, std::thread::hardware_concurrency());
  RunArgs batch_shared;
  auto* batch_cmd = app.add_subcommand("batch", "Run many scenarios on worker threads");
  batch_cmd->add_option("scenarios", batch_files, "Scenario files")->required();
  batch_cmd->add_option("--out", batch_out, "Output directory (one subdirectory per scenario)");
  batch_cmd->add_option("--threads", batch_threads, "Worker threads")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--horizon", batch_shared.horizon, "Override every horizon");
  batch_cmd->add_option("--seed", batch_shared.seed, "Override every seed");
  batch_cmd->add_option("--policy", batch_shared.policy, "Override every base policy");
  add_probe_flags(batch_cmd, batch_shared.probe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*run_cmd) {
      int code = kPass;
      std::cout << run_one(run_args, code) << '\n';
      return code;
    }
    if (*check_cmd) return cmd_check(check_trace, check_mode, exhaustive, check_out);
    if (*reduce_cmd) return cmd_reduce(reduce_trace, reduce_policy, reduce_out);
    if (*gen_random) {
      rnd.rate = Rational::parse(rnd_rate);
      rnd.policy = make_policy(rnd_policy);
      emit(gen_out, serialize_scenario(gen_random_scenario(rnd)));
      return kPass;
    }
    if (*gen_gadget) {
      gadget.policy = parse_base_policy(gadget_policy);
      emit(gen_out, serialize_scenario(build_rerouting_gadget(gadget).config));
      return kPass;
    }
    if (*batch_cmd) return cmd_batch(batch_files, batch_out, batch_threads, batch_shared);
  } catch (const TauConstraintError& e) {
    std::cerr << "error: tau constraint violated: " << e.what() << '\n';
    return kModel;
  } catch (const ScenarioError& e) {
    std::cerr << "error: model violation at " << e.what() << '\n';
    return kModel;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
