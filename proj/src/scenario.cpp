#include "dfsim/scenario.hpp"

#include <stdexcept>

namespace dfsim {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_edge(const Network& net, EdgeId e, const char* where) {
  require(e < net.edge_count(), std::string(where) + " references unknown edge index " + std::to_string(e));
}

}  // namespace

void ScenarioConfig::validate() const {
  adversary.validate();
  require(network.node_count() >= 1, "network needs at least one node");
  require(tau >= 1, "tau must be >= 1");
  require(tau_prime >= 1, "tau_prime must be >= 1");
  require(horizon >= 0, "horizon must be >= 0");
  require(policy.priorities >= 1, "priority count must be >= 1");

  for (const auto& inj : injections) {
    auto check = validate_path(network, inj.path);
    require(check.valid(), "injection at round " + std::to_string(inj.round) + ": " + check.describe());
    require(inj.round >= 1, "injection round must be >= 1");
    require(inj.priority < policy.priorities,
            "injection priority " + std::to_string(inj.priority) + " exceeds the policy's priority levels");
  }
  for (const auto& s : stalls) {
    require_edge(network, s.edge, "stall schedule");
    Round prev = 0;
    for (Round t : s.rounds) {
      require(t > prev, "stall rounds for edge " + network.edge(s.edge).id + " must be increasing and >= 1");
      prev = t;
    }
  }
  for (const auto& a : annihilations) {
    require_edge(network, a.edge, "annihilation choice");
    require(a.delay >= 0 && a.delay <= adversary.delay,
            "annihilation delay " + std::to_string(a.delay) + " outside [0, delta]");
  }
  for (const auto& f : failures) {
    require_edge(network, f.edge, "failure");
    require(f.round >= 1, "failure round must be >= 1");
    require(f.notify_delay >= 0 && f.notify_delay <= tau_prime,
            "notification delay " + std::to_string(f.notify_delay) + " exceeds tau_prime");
  }
  for (const auto& r : recoveries) {
    require_edge(network, r.edge, "recovery");
    require(r.round >= 1, "recovery round must be >= 1");
  }
  if (injection_generator) {
    require(injection_generator->attempts_per_round >= 0, "attempts_per_round must be >= 0");
    require(injection_generator->max_path_length >= 1, "max_path_length must be >= 1");
  }
  if (stall_generator) {
    require(stall_generator->probability >= Rational(0) && stall_generator->probability <= Rational(1),
            "stall probability must lie in [0, 1]");
    require(stall_generator->max_consecutive >= 1 && stall_generator->max_consecutive <= tau,
            "generated stall runs must be between 1 and tau rounds");
  }
}

}  // namespace dfsim
