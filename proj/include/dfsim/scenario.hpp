#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfsim/bucket.hpp"
#include "dfsim/network.hpp"
#include "dfsim/policy.hpp"
#include "dfsim/rational.hpp"

namespace dfsim {

struct ScriptedInjection {
  Round round = 0;
  Path path;
  std::uint8_t priority = 0;

  friend bool operator==(const ScriptedInjection&, const ScriptedInjection&) = default;
};

struct StallSchedule {
  EdgeId edge = 0;
  std::vector<Round> rounds;  // sorted, unique

  friend bool operator==(const StallSchedule&, const StallSchedule&) = default;
};

/// Chosen feedback delay for the group created when `edge` stalls at `round`.
/// 0 annihilates in the stall round itself; the adversary's full delay means
/// forced expiry.
struct AnnihilationChoice {
  EdgeId edge = 0;
  Round round = 0;
  std::int64_t delay = 0;

  friend bool operator==(const AnnihilationChoice&, const AnnihilationChoice&) = default;
};

struct FailureSpec {
  EdgeId edge = 0;
  Round round = 0;
  /// Rounds until the adversary receives the fail notification; <= tau'.
  std::int64_t notify_delay = 0;

  friend bool operator==(const FailureSpec&, const FailureSpec&) = default;
};

struct RecoverySpec {
  EdgeId edge = 0;
  Round round = 0;

  friend bool operator==(const RecoverySpec&, const RecoverySpec&) = default;
};

/// Online injector: every round it proposes random simple paths and keeps
/// each one the buckets can still afford.
struct InjectionGenerator {
  std::int64_t attempts_per_round = 4;
  std::int64_t max_path_length = 4;
  /// Last round with generated traffic; 0 means the horizon.
  Round until = 0;

  friend bool operator==(const InjectionGenerator&, const InjectionGenerator&) = default;
};

/// Random per-edge stall rounds with at most `max_consecutive` in a row.
struct StallGenerator {
  Rational probability{1, 5};
  std::int64_t max_consecutive = 1;

  friend bool operator==(const StallGenerator&, const StallGenerator&) = default;
};

/// Draws each group's feedback delay uniformly from [0, delay].
struct AnnihilationGenerator {
  friend bool operator==(const AnnihilationGenerator&, const AnnihilationGenerator&) = default;
};

struct ScenarioConfig {
  std::string name;
  Network network;
  AdversaryType adversary;
  std::int64_t tau = 1;
  std::int64_t tau_prime = 1;
  PolicyId policy;
  Round horizon = 0;
  std::uint64_t seed = 0;
  /// An edge stalled for tau consecutive rounds becomes permanently failed.
  bool promote_after_tau = false;
  /// When false, injections bypass the token buckets (replays of a
  /// transformed execution).
  bool enforce_tokens = true;

  std::vector<ScriptedInjection> injections;
  std::vector<StallSchedule> stalls;
  std::vector<AnnihilationChoice> annihilations;
  std::vector<FailureSpec> failures;
  std::vector<RecoverySpec> recoveries;

  std::optional<InjectionGenerator> injection_generator;
  std::optional<StallGenerator> stall_generator;
  std::optional<AnnihilationGenerator> annihilation_generator;

  /// Throws std::invalid_argument naming the first broken constraint.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

}  // namespace dfsim
