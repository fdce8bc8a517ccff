#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dfsim/bucket.hpp"
#include "dfsim/network.hpp"
#include "dfsim/scenario.hpp"

namespace dfsim {

struct InjectionEvent {
  PacketId packet = 0;
  Path path;
  std::uint8_t priority = 0;
  friend bool operator==(const InjectionEvent&, const InjectionEvent&) = default;
};

struct TransmissionEvent {
  PacketId packet = 0;
  EdgeId edge = 0;
  friend bool operator==(const TransmissionEvent&, const TransmissionEvent&) = default;
};

struct StallEvent {
  PacketId packet = 0;
  EdgeId edge = 0;
  friend bool operator==(const StallEvent&, const StallEvent&) = default;
};

struct GroupCreatedEvent {
  GroupId group = 0;
  EdgeId stalled_edge = 0;
  PacketId packet = 0;
  std::vector<EdgeId> members;
  friend bool operator==(const GroupCreatedEvent&, const GroupCreatedEvent&) = default;
};

struct AnnihilationEvent {
  GroupId group = 0;
  bool forced = false;
  friend bool operator==(const AnnihilationEvent&, const AnnihilationEvent&) = default;
};

struct FailureEvent {
  EdgeId edge = 0;
  bool promoted = false;
  friend bool operator==(const FailureEvent&, const FailureEvent&) = default;
};

struct FailNotifiedEvent {
  EdgeId edge = 0;
  Round failed_at = 0;
  friend bool operator==(const FailNotifiedEvent&, const FailNotifiedEvent&) = default;
};

struct RerouteEvent {
  PacketId packet = 0;
  EdgeId failed_edge = 0;
  Round failed_at = 0;
  Path old_suffix;
  Path new_suffix;
  friend bool operator==(const RerouteEvent&, const RerouteEvent&) = default;
};

struct RecoveryEvent {
  EdgeId edge = 0;
  Round failed_at = 0;
  friend bool operator==(const RecoveryEvent&, const RecoveryEvent&) = default;
};

struct AbsorptionEvent {
  PacketId packet = 0;
  friend bool operator==(const AbsorptionEvent&, const AbsorptionEvent&) = default;
};

using Event = std::variant<InjectionEvent, TransmissionEvent, StallEvent, GroupCreatedEvent, AnnihilationEvent,
                           FailureEvent, FailNotifiedEvent, RerouteEvent, RecoveryEvent, AbsorptionEvent>;

/// Stable wire name of an event kind ("inject", "transmit", ...).
std::string event_name(const Event& ev);

struct RoundRecord {
  Round round = 0;
  std::vector<Event> events;
  /// Waiting packets per edge at the end of the round; empty when the run
  /// did not record per-edge sizes.
  std::vector<std::int64_t> queue_sizes;
  /// Total queued packets Q(t).
  std::int64_t total = 0;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct ExecutionTrace {
  ScenarioConfig config;
  std::vector<RoundRecord> rounds;
  /// FNV-1a digest of every event and queue snapshot, accumulated by the
  /// engine whether or not events were stored.
  std::uint64_t digest = 0;

  [[nodiscard]] Round horizon() const { return static_cast<Round>(rounds.size()); }
  [[nodiscard]] std::int64_t max_total() const;

  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

/// 64-bit FNV-1a, fed with fixed-width integers.
class Fnv64 {
 public:
  void add(std::int64_t value);
  void add_bytes(const void* data, std::size_t size);
  [[nodiscard]] std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

void hash_event(Fnv64& h, Round round, const Event& ev);

}  // namespace dfsim
