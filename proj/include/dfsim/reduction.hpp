#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfsim/feedback.hpp"
#include "dfsim/policy.hpp"
#include "dfsim/rational.hpp"
#include "dfsim/scenario.hpp"
#include "dfsim/trace.hpp"

namespace dfsim {

/// Parameters of the 2-priority adversary that simulates a delayed-feedback
/// one: rate (r + tau) / (tau + 1) and burstiness r * delta + b.
struct ReducedParams {
  Rational rate;
  Rational burstiness;
  Rational source_rate;
  std::int64_t source_burstiness = 0;
  std::int64_t delay = 0;
  std::int64_t tau = 0;
};

/// Throws std::invalid_argument unless 0 < r < 1 and b, delta, tau >= 1.
ReducedParams compute_reduced_params(const Rational& rate, std::int64_t burstiness, std::int64_t delay,
                                     std::int64_t tau);

/// A window of tau + 1 consecutive rounds in which a queue stalled every round.
struct TauWindow {
  EdgeId edge = 0;
  Round first = 0;
  Round last = 0;
};

class TauConstraintError : public std::runtime_error {
 public:
  TauConstraintError(const TauWindow& window, const std::string& what) : std::runtime_error(what), window_(window) {}
  [[nodiscard]] const TauWindow& window() const { return window_; }

 private:
  TauWindow window_;
};

/// First queue/window with more than tau stalls among tau + 1 rounds.
std::optional<TauWindow> find_tau_violation(const StallTrace& stalls, std::int64_t tau);

/// Source injections kept as low-priority traffic, plus one high-priority
/// single-edge packet on every queue in every round that queue stalled.
struct TwoPriorityTrace {
  std::vector<ScriptedInjection> low;
  std::vector<ScriptedInjection> high;
  bool stall_free = true;
};

/// Throws TauConstraintError when the source's stalls break the tau density
/// bound.
TwoPriorityTrace build_two_priority_trace(const ExecutionTrace& src);

/// Stall-free, token-free scenario that runs the 2-priority traffic under
/// Prioritized(base, 2).
ScenarioConfig two_priority_config(const ExecutionTrace& src, const TwoPriorityTrace& two, BasePolicy base);

/// Per queue and interval: injections + stalls <= r' |T| + b' + tau.
IntervalVerdict check_combined_congestion(const ExecutionTrace& src, const ReducedParams& params,
                                          bool exhaustive = false);

struct ReductionVerdict {
  ReducedParams params;
  std::size_t low_priority_packets = 0;
  std::size_t high_priority_packets = 0;
  /// No queue ever holds two high-priority packets.
  bool one_high_priority = true;
  /// Low-priority crossings (packet, edge, round) identical to the source.
  bool transmissions_match = true;
  /// Every high-priority packet crosses in the round it was injected.
  bool high_priority_slot = true;
  bool congestion_bound = true;
  std::optional<IntervalWitness> congestion_worst;
  std::optional<std::string> first_divergence;

  [[nodiscard]] bool holds() const {
    return one_high_priority && transmissions_match && high_priority_slot && congestion_bound;
  }
};

/// Builds the 2-priority trace, replays it with Prioritized(policy, 2) and
/// checks the construction's invariants against the source execution.
ReductionVerdict verify_reduction(const ExecutionTrace& src, BasePolicy policy);
ReductionVerdict verify_reduction(const ExecutionTrace& src);

}  // namespace dfsim
