#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dfsim/network.hpp"
#include "dfsim/rational.hpp"

namespace dfsim {

/// Adversary parameters: injection rate, burstiness, feedback delay.
struct AdversaryType {
  Rational rate{1};
  std::int64_t burstiness = 1;
  std::int64_t delay = 1;

  /// Throws std::invalid_argument unless 0 < rate <= 1, burstiness >= 1 and
  /// delay >= 1.
  void validate() const;

  friend bool operator==(const AdversaryType&, const AdversaryType&) = default;
};

using GroupId = std::int64_t;

struct Antitoken {
  EdgeId edge = 0;
  std::int64_t value = 0;
  GroupId group = 0;
};

/// The antitokens created by one stall: one per edge the packet still had to
/// cross, all sharing a value and annihilated together.
struct AntitokenGroup {
  GroupId id = 0;
  Round created = 0;
  EdgeId stalled_edge = 0;
  PacketId packet = 0;
  std::vector<Antitoken> members;
  bool alive = true;
  Round annihilated_at = -1;
  bool forced = false;
};

struct InjectionRefusal {
  EdgeId edge = 0;
  std::int64_t requested = 0;
  Rational available;
};

struct Annihilation {
  GroupId group = 0;
  Round round = 0;
  bool forced = false;
};

/// Per-edge token buckets plus the live antitoken groups that drain them.
class BucketState {
 public:
  BucketState(std::size_t edge_count, AdversaryType type);

  /// Adds the rate to every bucket, clamping at the burstiness.
  void tick_buckets();

  /// Checks a batch of injections jointly: edge e needs as many whole tokens
  /// as there are paths through it. Returns the lowest-index edge that falls
  /// short, or nullopt when the batch is affordable. State is not touched.
  [[nodiscard]] std::optional<InjectionRefusal> check_injection(std::span<const Path> paths) const;

  /// check_injection, then debits every bucket on success. On refusal the
  /// state is unchanged.
  std::optional<InjectionRefusal> inject(std::span<const Path> paths);

  /// Creates a group with one antitoken, valued at the delay, for every edge
  /// from the packet's next edge to the end of its path.
  GroupId register_stall(const Packet& pkt, Round round);

  /// Voluntary annihilation: subtracts the rate from each member's bucket.
  /// Throws ContractError when the group is dead.
  Annihilation annihilate_group(GroupId id, Round round);

  /// Decrements every live antitoken; groups reaching zero are annihilated
  /// (forced). Returned in group-id order.
  std::vector<Annihilation> tick_antitokens(Round round);

  [[nodiscard]] const Rational& level(EdgeId e) const { return levels_.at(e); }
  void set_level(EdgeId e, Rational value) { levels_.at(e) = value; }
  [[nodiscard]] const AdversaryType& type() const { return type_; }
  [[nodiscard]] const AntitokenGroup& group(GroupId id) const { return groups_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] const std::vector<AntitokenGroup>& groups() const { return groups_; }
  [[nodiscard]] std::size_t live_group_count() const { return live_.size(); }

 private:
  void apply_annihilation(AntitokenGroup& g, Round round, bool forced);

  AdversaryType type_;
  Rational cap_;
  std::vector<Rational> levels_;
  std::vector<AntitokenGroup> groups_;
  std::vector<GroupId> live_;
};

}  // namespace dfsim
