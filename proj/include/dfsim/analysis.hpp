#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfsim/network.hpp"
#include "dfsim/policy.hpp"
#include "dfsim/rational.hpp"
#include "dfsim/scenario.hpp"
#include "dfsim/trace.hpp"

namespace dfsim {

// ---------------------------------------------------------------------------
// Stability probe

struct ProbeParams {
  std::int64_t window = 50;
  std::int64_t k = 4;
  std::int64_t g = 1;
};

enum class StabilityVerdict { kBounded, kGrowth };
std::string to_string(StabilityVerdict v);

/// Finite-horizon heuristic. A bounded verdict only says no growth was seen
/// within the horizon; boundedness itself cannot be decided from a prefix.
struct StabilityReport {
  Round horizon = 0;
  ProbeParams params;
  /// Window j covers rounds (offset + j*W, offset + (j+1)*W]; windows are
  /// aligned so the last one ends at the horizon.
  Round offset = 0;
  std::vector<std::int64_t> window_max;
  std::int64_t overall_max = 0;
  StabilityVerdict verdict = StabilityVerdict::kBounded;
  /// Indices of the k + 1 trailing windows whose maxima climb by >= g each.
  std::vector<std::size_t> witness;
};

/// Probes one occupancy series (index 0 is round 1). Growth means the last
/// k + 1 windows each exceed the previous one's maximum by at least g.
/// Throws std::invalid_argument when the series is shorter than 2 * W * k or
/// a parameter is < 1.
StabilityReport probe_series(std::span<const std::int64_t> occupancy, const ProbeParams& params);

/// Probes the total queued packets Q(t).
StabilityReport probe_stability(const ExecutionTrace& trace, const ProbeParams& params = {});

std::vector<std::int64_t> total_series(const ExecutionTrace& trace);
/// Needs recorded queue sizes.
std::vector<std::int64_t> queue_series(const ExecutionTrace& trace, EdgeId edge);

// ---------------------------------------------------------------------------
// Re-routing gadget

struct GadgetParams {
  std::int64_t branches = 2;
  std::int64_t burst = 10;
  std::int64_t fail_duration = 10;
  std::int64_t cycles = 200;
  BasePolicy policy = BasePolicy::kFifo;
};

/// Branch i has nodes ei, ei', fi and edges ei>ei', ei'>fi, ei'>h, h'>fi;
/// all branches share one h>h' link. Each cycle injects `burst` packets on
/// ei>ei'>fi, fails every ei'>fi one round later (known at once), and
/// recovers them when the next cycle starts.
struct ReroutingGadget {
  ScenarioConfig config;
  GadgetParams params;
  std::int64_t period = 0;
  EdgeId shared_link = 0;
  /// Round ending each cycle, in order.
  std::vector<Round> cycle_ends;
};

/// Throws std::invalid_argument when a parameter is < 1.
ReroutingGadget build_rerouting_gadget(const GadgetParams& params = {});

/// Queue length of the shared link at every cycle end.
std::vector<std::int64_t> cycle_end_lengths(const ReroutingGadget& gadget, const ExecutionTrace& trace);

// ---------------------------------------------------------------------------
// Re-routed packet accounting

struct RerouteCount {
  /// (failed edge, failure round) -> packets re-routed because of it.
  std::map<std::pair<EdgeId, Round>, std::int64_t> per_failure;
  std::int64_t total = 0;
  /// Re-routes so far at the end of each round.
  std::vector<std::int64_t> cumulative;
  Round last_reroute = 0;
};

RerouteCount count_rerouted(const ExecutionTrace& trace);

/// Bounded re-routing after permanent failures: every re-routed packet was
/// injected before its failure was notified, and no re-route happens after
/// `settle_by`.
struct RerouteBoundReport {
  bool injected_before_notice = true;
  bool settled = true;
  RerouteCount counts;
  std::vector<std::string> problems;

  [[nodiscard]] bool holds() const { return injected_before_notice && settled; }
};

RerouteBoundReport check_reroute_bound(const ExecutionTrace& trace, Round settle_by);

// ---------------------------------------------------------------------------
// Trace audit

/// Structural invariants every engine trace must satisfy.
struct TraceAudit {
  /// Injected = queued + absorbed at the end of every round.
  bool conservation = true;
  /// At most one crossing per edge per round.
  bool unit_capacity = true;
  /// A failed, unrecovered edge carries nothing.
  bool failed_edges_silent = true;
  /// No injection crosses an edge whose failure the adversary already knows.
  bool injections_avoid_notified = true;
  /// Every stall's group is annihilated within [t, t + delta], or is still
  /// pending when the horizon cuts it off.
  bool feedback_window = true;
  std::vector<std::string> problems;

  [[nodiscard]] bool holds() const {
    return conservation && unit_capacity && failed_edges_silent && injections_avoid_notified && feedback_window;
  }
};

TraceAudit audit_trace(const ExecutionTrace& trace);

// ---------------------------------------------------------------------------
// Random scenarios

struct RandomScenarioParams {
  std::uint64_t seed = 1;
  std::int64_t min_nodes = 3;
  std::int64_t max_nodes = 12;
  Rational rate{1, 2};
  std::int64_t burstiness = 2;
  std::int64_t delay = 2;
  std::int64_t tau = 1;
  std::int64_t tau_prime = 1;
  PolicyId policy;
  Round horizon = 500;
  Rational stall_probability{1, 5};
  /// Permanent failures; the surviving graph stays strongly connected, so
  /// fewer are placed only when no further edge can be spared.
  std::int64_t failures = 0;
  std::int64_t attempts_per_round = 4;
  std::int64_t max_path_length = 4;
};

/// Deterministic per seed. Throws std::invalid_argument unless 0 < r < 1 and
/// the node bounds make sense.
ScenarioConfig gen_random_scenario(const RandomScenarioParams& params);

}  // namespace dfsim
