// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dfsim/analysis.hpp"
#include "dfsim/engine.hpp"
#include "dfsim/feedback.hpp"
#include "dfsim/reduction.hpp"

using namespace dfsim;

namespace {

// Ceiling on max Q(t) over the stable-policy regression runs (criterion 6),
// recorded from the first full run and frozen here.
constexpr std::int64_t kFrozenMaxQ = 20;

const Rational kRates[] = {Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(9, 10)};
const std::int64_t kSmall[] = {1, 2, 4};
const BasePolicy kStable[] = {BasePolicy::kFtg, BasePolicy::kNfs, BasePolicy::kSis};

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void fail(const std::string& what) {
    pass = false;
    if (problems.size() < 5) problems.push_back(what);
  }
};

// Every run made by criteria 1-7, kept for the determinism rerun.
struct Recorded {
  ScenarioConfig config;
  EngineOptions options;
  std::uint64_t digest = 0;
};
std::map<std::string, Recorded> g_runs;

ExecutionTrace run_recorded(const std::string& label, const ScenarioConfig& cfg, EngineOptions opts = {}) {
  auto trace = run(cfg, opts);
  g_runs[label] = Recorded{cfg, opts, trace.digest};
  return trace;
}

RandomScenarioParams base_params(std::uint64_t seed) {
  RandomScenarioParams p;
  p.seed = seed;
  p.rate = kRates[seed % 4];
  p.burstiness = kSmall[(seed / 4) % 3];
  p.delay = kSmall[(seed / 12) % 3];
  p.tau = 1 + static_cast<std::int64_t>(seed % 3);
  p.policy = PolicyId{static_cast<BasePolicy>(seed % 8)};
  p.horizon = 500;
  return p;
}

std::string label(const char* family, std::uint64_t seed, const char* extra = "") {
  return std::string(family) + "/" + std::to_string(seed) + extra;
}

std::vector<ExecutionTrace> g_df_traces;

Outcome criterion_1() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    auto trace = run_recorded(label("df", seed), gen_random_scenario(base_params(seed)));
    auto v = check_trace_admissibility(trace);
    if (!v.holds) o.fail("seed " + std::to_string(seed) + " violates the injection bound");
    g_df_traces.push_back(std::move(trace));
  }
  o.detail = "1000 traces, injection bound with bucket feedback";
  return o;
}

Outcome criterion_2() {
  Outcome o;
  for (const auto& trace : g_df_traces) {
    auto v = check_trace_stall_bound(trace, true);
    if (!v.holds) o.fail("seed " + std::to_string(trace.config.seed) + " violates the stall bound");
  }
  o.detail = std::to_string(g_df_traces.size()) + " traces, every queue and interval enumerated";
  return o;
}

Outcome criterion_3() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto cfg = gen_random_scenario(base_params(seed));
    cfg.stall_generator.reset();
    cfg.annihilation_generator.reset();
    auto trace = run_recorded(label("regular", seed), cfg);
    std::size_t stalls = 0;
    for (const auto& rec : trace.rounds) {
      for (const auto& ev : rec.events) stalls += std::holds_alternative<StallEvent>(ev) ? 1 : 0;
    }
    if (stalls != 0) o.fail("seed " + std::to_string(seed) + " stalled");
    if (!check_trace_regular(trace).holds) o.fail("seed " + std::to_string(seed) + " is not leaky-bucket");
  }
  o.detail = "200 stall-free traces under the plain (r, b) bound";
  return o;
}

Outcome criterion_4() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  auto gadget = build_rerouting_gadget({2, 10, 10, 200});
  auto trace = run_recorded("gadget", gadget.config);
  auto lengths = cycle_end_lengths(gadget, trace);
  if (lengths.size() != 200) o.fail("expected 200 cycle ends, got " + std::to_string(lengths.size()));
  for (std::size_t c = 1; c < lengths.size(); ++c) {
    if (lengths[c] < lengths[c - 1]) o.fail("cycle " + std::to_string(c + 1) + " shrank");
    if (c + 1 > 5 && lengths[c] < lengths[c - 1] + 1) o.fail("cycle " + std::to_string(c + 1) + " did not grow");
  }
  // Regression: 10 after the first cycle, then 9 more every cycle.
  for (std::size_t c = 0; c < lengths.size(); ++c) {
    if (lengths[c] != 10 + 9 * static_cast<std::int64_t>(c)) {
      o.fail("cycle " + std::to_string(c + 1) + " length " + std::to_string(lengths[c]));
      break;
    }
  }
  auto report = probe_stability(trace);
  if (report.verdict != StabilityVerdict::kGrowth) o.fail("probe verdict " + to_string(report.verdict));
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > 30) o.fail("took " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << "cycle-end lengths " << lengths.front() << " .. " << lengths.back() << ", probe "
    << to_string(report.verdict);
  o.detail = d.str();
  return o;
}

Outcome criterion_5() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto p = base_params(seed);
    p.horizon = 400;
    auto trace = run_recorded(label("reduce", seed), gen_random_scenario(p));
    auto v = verify_reduction(trace);
    if (!v.holds()) {
      o.fail("seed " + std::to_string(seed) + ": " + v.first_divergence.value_or("combined congestion exceeded"));
    }
  }
  o.detail = "200 traces, tau in {1, 2, 3}";
  return o;
}

Outcome criterion_6() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::int64_t observed = 0;
  for (BasePolicy policy : kStable) {
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
      auto p = base_params(seed);
      p.tau = 1 + static_cast<std::int64_t>(seed % 2);
      p.policy = PolicyId{policy};
      p.horizon = 10000;
      auto cfg = gen_random_scenario(p);
      auto trace = run_recorded(label("stable", seed, ("/" + to_string(policy)).c_str()), cfg, EngineOptions{false, false});
      auto report = probe_stability(trace);
      observed = std::max(observed, report.overall_max);
      if (report.verdict == StabilityVerdict::kGrowth) {
        o.fail(to_string(policy) + " seed " + std::to_string(seed) + " growth-detected");
      }
    }
  }
  if (kFrozenMaxQ > 0 && observed > kFrozenMaxQ) {
    o.fail("max Q " + std::to_string(observed) + " above the frozen ceiling " + std::to_string(kFrozenMaxQ));
  }
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > 300) o.fail("took " + std::to_string(secs) + " s");
  o.detail = "900 runs of 10^4 rounds, max Q " + std::to_string(observed) + " (ceiling " +
             std::to_string(kFrozenMaxQ) + ")";
  return o;
}

// Round of the last absorption among packets re-routed because of `key`, or
// -1 when one of them is still queued at the horizon.
std::map<std::pair<EdgeId, Round>, Round> last_rerouted_absorption(const ExecutionTrace& trace) {
  std::map<std::pair<EdgeId, Round>, std::set<PacketId>> diverted;
  std::map<PacketId, Round> absorbed;
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* r = std::get_if<RerouteEvent>(&ev)) diverted[{r->failed_edge, r->failed_at}].insert(r->packet);
      if (const auto* a = std::get_if<AbsorptionEvent>(&ev)) absorbed[a->packet] = rec.round;
    }
  }
  std::map<std::pair<EdgeId, Round>, Round> last;
  for (const auto& [key, packets] : diverted) {
    Round when = 0;
    for (PacketId id : packets) {
      auto it = absorbed.find(id);
      if (it == absorbed.end()) {
        when = -1;
        break;
      }
      when = std::max(when, it->second);
    }
    last[key] = when;
  }
  return last;
}

Outcome criterion_7() {
  Outcome o;
  // (a) Re-routing stops once the packets already in flight at the last
  // notice have drained.
  int with_reroutes = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto p = base_params(seed);
    p.policy = PolicyId{kStable[seed % 3]};
    p.failures = 1 + static_cast<std::int64_t>(seed % 3);
    p.tau_prime = 1 + static_cast<std::int64_t>(seed % 2);
    p.horizon = 2000;
    auto cfg = gen_random_scenario(p);
    auto trace = run_recorded(label("failures", seed), cfg);

    Round last_failure = 0;
    Round last_notice = 0;
    std::map<PacketId, Round> injected;
    std::map<PacketId, Round> absorbed;
    for (const auto& rec : trace.rounds) {
      for (const auto& ev : rec.events) {
        if (std::holds_alternative<FailureEvent>(ev)) last_failure = rec.round;
        if (std::holds_alternative<FailNotifiedEvent>(ev)) last_notice = rec.round;
        if (const auto* i = std::get_if<InjectionEvent>(&ev)) injected[i->packet] = rec.round;
        if (const auto* a = std::get_if<AbsorptionEvent>(&ev)) absorbed[a->packet] = rec.round;
      }
    }
    if (last_notice > last_failure + cfg.tau_prime) o.fail("seed " + std::to_string(seed) + ": late notice");
    // Drain: rounds after the last notice until every packet injected
    // before it is absorbed.
    Round drained = last_notice;
    bool all_drained = true;
    for (const auto& [packet, round] : injected) {
      if (round >= last_notice) continue;
      auto it = absorbed.find(packet);
      if (it == absorbed.end()) {
        all_drained = false;
      } else {
        drained = std::max(drained, it->second);
      }
    }
    if (!all_drained) {
      o.fail("seed " + std::to_string(seed) + ": packets from before the last notice never drained");
      continue;
    }
    auto report = check_reroute_bound(trace, drained);
    if (!report.holds()) o.fail("seed " + std::to_string(seed) + ": " + report.problems.front());
    if (report.counts.total > 0) ++with_reroutes;
  }

  // (b) Recovery timing: one round early is rejected, as is the absorbing
  // round itself; one round later is accepted. Variants run from the scripted
  // replay of the base trace so the recovery cannot reshuffle injections.
  // A variant belongs to the suite only when, in its own execution, the
  // recovery really sits at that offset from the last re-routed absorption.
  int suite = 0;
  int off_target = 0;
  for (std::uint64_t seed = 1; seed <= 80 && suite < 40; ++seed) {
    auto p = base_params(seed);
    p.policy = PolicyId{kStable[seed % 3]};
    p.failures = 1 + static_cast<std::int64_t>(seed % 3);
    p.horizon = 800;
    auto base = run(gen_random_scenario(p));
    auto script = replay_config(base);
    for (const auto& [key, last] : last_rerouted_absorption(base)) {
      if (last < 0 || last - 1 <= key.second || last + 1 > script.horizon) continue;
      bool counted = false;
      for (Round shift : {-1, 0, 1}) {
        auto variant = script;
        variant.recoveries.push_back({key.first, last + shift});
        auto trace = run_recorded(
            label("recovery", seed, ("/" + std::to_string(key.first) + "/" + std::to_string(shift)).c_str()), variant);
        auto after = last_rerouted_absorption(trace);
        auto it = after.find(key);
        if (it == after.end() || it->second != last) {
          ++off_target;
          continue;
        }
        counted = true;
        auto verdict = validate_recovery(trace);
        bool edge_ok = true;
        for (const auto& v : verdict.violations) edge_ok = edge_ok && v.edge != key.first;
        if (edge_ok != (shift > 0)) {
          o.fail("seed " + std::to_string(seed) + " edge " + std::to_string(key.first) + " shift " +
                 std::to_string(shift) + (shift > 0 ? " rejected" : " accepted"));
        }
      }
      suite += counted ? 1 : 0;
    }
  }
  if (with_reroutes < 10) o.fail("only " + std::to_string(with_reroutes) + " scenarios re-routed anything");
  if (suite < 20) o.fail("recovery suite too small: " + std::to_string(suite));
  o.detail = "(a) 100 scenarios, " + std::to_string(with_reroutes) + " with re-routes; (b) " + std::to_string(suite) +
             " recovery cases x 3 shifts, " + std::to_string(off_target) + " variants off target";
  return o;
}

Outcome criterion_8() {
  Outcome o;
  for (const auto& [name, rec] : g_runs) {
    if (run(rec.config, rec.options).digest != rec.digest) o.fail(name);
  }
  o.detail = std::to_string(g_runs.size()) + " runs repeated, digests compared";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 bucket adversary traces satisfy the injection bound", criterion_1},
      {"2 stall bound on every queue and interval", criterion_2},
      {"3 stall-free traces are leaky-bucket traces", criterion_3},
      {"4 rerouting gadget grows without bound", criterion_4},
      {"5 two-priority reduction", criterion_5},
      {"6 FTG, NFS and SIS stay bounded", criterion_6},
      {"7 bounded re-routing and recovery timing", criterion_7},
      {"8 deterministic reruns", criterion_8},
  };
  bool all = true;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << "  [" << o.detail << "; " << timing
              << "]\n";
    for (const auto& p : o.problems) std::cout << "      " << p << '\n';
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
