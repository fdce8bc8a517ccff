#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "dfsim/network.hpp"

namespace dfsim {

enum class BasePolicy {
  kFifo,    // first in, first out at this queue
  kNtg,     // nearest to go
  kFtg,     // farthest to go
  kNfs,     // nearest from source
  kFfs,     // farthest from source
  kSis,     // shortest in system
  kLis,     // longest in system (control policy)
  kSplNfs,  // slowest previous link, ties nearest from source
};

/// A base policy, optionally wrapped so that higher-priority packets always
/// win. `priorities` < 2 means unwrapped.
struct PolicyId {
  BasePolicy base = BasePolicy::kFifo;
  int priorities = 1;

  [[nodiscard]] bool prioritized() const { return priorities >= 2; }

  friend bool operator==(const PolicyId&, const PolicyId&) = default;
};

/// What a policy may look at when choosing among waiting packets. Re-routing
/// status is deliberately absent.
struct PacketView {
  PacketId id = 0;
  Round arrival = 0;
  Round injected = 0;
  std::int64_t traversed = 0;
  std::int64_t remaining = 0;
  std::int64_t previous_slowness = 0;
  int priority = 0;
};

/// Lexicographic rank; the smallest key is transmitted first. The last
/// meaningful component is always the packet id, so keys never tie.
using PolicyKey = std::array<std::int64_t, 4>;

PolicyKey policy_key(const PolicyId& policy, const PacketView& view);

/// Deterministic choice among packets waiting at one queue. Throws
/// ContractError on an empty candidate set.
PacketId select(const PolicyId& policy, std::span<const PacketView> candidates);

std::string to_string(BasePolicy base);
std::string to_string(const PolicyId& policy);
/// Accepts FIFO, NTG, FTG, NFS, FFS, SIS, LIS, SPL-NFS (case-insensitive).
BasePolicy parse_base_policy(std::string_view name);
PolicyId make_policy(std::string_view name, int priorities = 1);

}  // namespace dfsim
