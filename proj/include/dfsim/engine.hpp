#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "dfsim/bucket.hpp"
#include "dfsim/network.hpp"
#include "dfsim/policy.hpp"
#include "dfsim/rng.hpp"
#include "dfsim/scenario.hpp"
#include "dfsim/trace.hpp"

namespace dfsim {

struct EngineOptions {
  bool record_events = true;
  bool record_queue_sizes = true;
};

struct RoundReport {
  Round round = 0;
  std::int64_t injected = 0;
  std::int64_t transmitted = 0;
  std::int64_t stalled = 0;
  std::int64_t absorbed = 0;
  std::int64_t rerouted = 0;
  std::int64_t total = 0;
};

/// Round-synchronous executor. Each step runs, in order:
///   1. bucket tick
///   2. antitoken tick (forced expiries), then scheduled voluntary annihilations
///   3. link failures, fail notifications due this round, recoveries
///   4. injections (scripted, then generated), debited jointly from the buckets
///   5. per edge: policy selection, then either a stall or a transmission;
///      packets that cross join their next queue only after every edge is done
///   6. re-routing of packets parked behind a failed edge whose failure is known
///   7. queue snapshot
class Engine {
 public:
  explicit Engine(ScenarioConfig config, EngineOptions options = {});

  /// Executes the next round. Throws ScenarioError on refused injections or
  /// unreachable re-routes, ContractError when the horizon is already reached.
  RoundReport step();

  [[nodiscard]] bool done() const { return round_ >= config_.horizon; }
  [[nodiscard]] Round round() const { return round_; }

  [[nodiscard]] const ScenarioConfig& config() const { return config_; }
  [[nodiscard]] const BucketState& buckets() const { return buckets_; }
  [[nodiscard]] const Packet& packet(PacketId id) const { return packets_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::size_t packet_count() const { return packets_.size(); }
  [[nodiscard]] std::size_t queue_length(EdgeId e) const { return queues_.at(e).size(); }
  /// Waiting packets ordered by (arrival round, packet id).
  [[nodiscard]] std::vector<PacketId> queue_in_arrival_order(EdgeId e) const;
  [[nodiscard]] std::int64_t absorbed_count() const { return absorbed_; }
  [[nodiscard]] std::int64_t queued_count() const;
  [[nodiscard]] bool edge_failed(EdgeId e) const { return failed_.at(e); }

  /// Hands over the accumulated trace; the engine is spent afterwards.
  ExecutionTrace take_trace() &&;

 private:
  using QueueEntry = std::pair<PolicyKey, PacketId>;

  void expand_stalls();
  void enqueue(PacketId id, Round arrival);
  PacketView view_of(PacketId id) const;
  std::int64_t choose_delay(EdgeId edge, Round round);
  Path propose_path();

  ScenarioConfig config_;
  EngineOptions options_;
  BucketState buckets_;
  Round round_ = 0;

  std::vector<Packet> packets_;
  std::vector<Round> arrival_;
  std::vector<std::set<QueueEntry>> queues_;
  std::int64_t absorbed_ = 0;

  std::vector<std::vector<std::uint8_t>> stalled_;  // [edge][round]
  std::map<std::pair<EdgeId, Round>, std::int64_t> chosen_delay_;
  std::map<Round, std::vector<GroupId>> voluntary_;
  std::map<Round, std::vector<std::size_t>> scripted_;
  std::map<Round, std::vector<FailureSpec>> failures_;
  std::map<Round, std::vector<std::pair<EdgeId, Round>>> notifications_;
  std::map<Round, std::vector<EdgeId>> recoveries_;
  std::map<Round, std::vector<EdgeId>> promotions_;

  std::vector<bool> failed_;
  std::vector<bool> visible_;
  std::vector<Round> failed_at_;
  std::vector<std::int64_t> stall_run_;

  Rng injection_rng_;
  Rng annihilation_rng_;

  ExecutionTrace trace_;
  Fnv64 digest_;
};

/// Runs a scenario from round 1 to its horizon.
ExecutionTrace run(const ScenarioConfig& config, EngineOptions options = {});

/// Replaces the untraversed part of `pkt`'s path with the fewest-edge route
/// (lexicographic edge-id tie-break) from its current node to its destination
/// that avoids every edge flagged in `blocked`. Throws ScenarioError when no
/// such route exists.
Packet reroute(const Network& net, Packet pkt, const std::vector<bool>& blocked, Round round);

/// Scenario that reproduces `trace` from explicit schedules only: the trace's
/// injections become the script, its stalls and annihilation delays become
/// explicit schedules, and all generators are dropped.
ScenarioConfig replay_config(const ExecutionTrace& trace);

struct RecoveryViolation {
  EdgeId edge = 0;
  Round recovered_at = 0;
  Round failed_at = 0;
  PacketId packet = 0;
  /// -1 when the packet never reached its destination within the horizon.
  Round absorbed_at = -1;
};

struct RecoveryVerdict {
  bool valid = true;
  std::vector<RecoveryViolation> violations;
};

/// A link may recover only once every packet re-routed because of that
/// failure has been absorbed in an earlier round.
RecoveryVerdict validate_recovery(const ExecutionTrace& trace);

}  // namespace dfsim
