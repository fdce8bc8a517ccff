#include "dfsim/policy.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "dfsim/errors.hpp"

namespace dfsim {

PolicyKey policy_key(const PolicyId& policy, const PacketView& v) {
  // Slot 0 carries the (negated) priority when wrapped.
  PolicyKey key{policy.prioritized() ? -static_cast<std::int64_t>(v.priority) : 0, 0, 0, 0};
  auto set = [&key](std::int64_t a, std::int64_t b, std::int64_t c) {
    key[1] = a;
    key[2] = b;
    key[3] = c;
  };
  switch (policy.base) {
    case BasePolicy::kFifo: set(v.arrival, v.id, 0); break;
    case BasePolicy::kNtg: set(v.remaining, v.id, 0); break;
    case BasePolicy::kFtg: set(-v.remaining, v.id, 0); break;
    case BasePolicy::kNfs: set(v.traversed, v.id, 0); break;
    case BasePolicy::kFfs: set(-v.traversed, v.id, 0); break;
    case BasePolicy::kSis: set(-v.injected, v.id, 0); break;
    case BasePolicy::kLis: set(v.injected, v.id, 0); break;
    case BasePolicy::kSplNfs: set(-v.previous_slowness, v.traversed, v.id); break;
  }
  return key;
}

PacketId select(const PolicyId& policy, std::span<const PacketView> candidates) {
  if (candidates.empty()) throw ContractError("policy select on an empty queue");
  const PacketView* best = &candidates.front();
  PolicyKey best_key = policy_key(policy, *best);
  for (const auto& c : candidates.subspan(1)) {
    PolicyKey k = policy_key(policy, c);
    if (k < best_key) {
      best_key = k;
      best = &c;
    }
  }
  return best->id;
}

std::string to_string(BasePolicy base) {
  switch (base) {
    case BasePolicy::kFifo: return "FIFO";
    case BasePolicy::kNtg: return "NTG";
    case BasePolicy::kFtg: return "FTG";
    case BasePolicy::kNfs: return "NFS";
    case BasePolicy::kFfs: return "FFS";
    case BasePolicy::kSis: return "SIS";
    case BasePolicy::kLis: return "LIS";
    case BasePolicy::kSplNfs: return "SPL-NFS";
  }
  return "?";
}

std::string to_string(const PolicyId& policy) {
  if (!policy.prioritized()) return to_string(policy.base);
  return "Prioritized(" + to_string(policy.base) + ", " + std::to_string(policy.priorities) + ")";
}

BasePolicy parse_base_policy(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto base : {BasePolicy::kFifo, BasePolicy::kNtg, BasePolicy::kFtg, BasePolicy::kNfs, BasePolicy::kFfs,
                    BasePolicy::kSis, BasePolicy::kLis, BasePolicy::kSplNfs}) {
    if (to_string(base) == upper) return base;
  }
  throw std::invalid_argument("unknown scheduling policy '" + std::string(name) + "'");
}

PolicyId make_policy(std::string_view name, int priorities) {
  if (priorities < 1) throw std::invalid_argument("priority count must be >= 1");
  return PolicyId{parse_base_policy(name), priorities};
}

}  // namespace dfsim
