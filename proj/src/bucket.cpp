#include "dfsim/bucket.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "dfsim/errors.hpp"

namespace dfsim {

void AdversaryType::validate() const {
  if (rate <= Rational(0) || rate > Rational(1)) throw std::invalid_argument("rate must lie in (0, 1], got " + rate.str());
  if (burstiness < 1) throw std::invalid_argument("burstiness must be >= 1");
  if (delay < 1) throw std::invalid_argument("feedback delay must be >= 1");
}

BucketState::BucketState(std::size_t edge_count, AdversaryType type)
    : type_(type), cap_(type.burstiness), levels_(edge_count, Rational(0)) {
  type_.validate();
}

void BucketState::tick_buckets() {
  for (auto& k : levels_) {
    k += type_.rate;
    if (k > cap_) k = cap_;
  }
}

std::optional<InjectionRefusal> BucketState::check_injection(std::span<const Path> paths) const {
  std::map<EdgeId, std::int64_t> demand;
  for (const auto& path : paths) {
    for (EdgeId e : path) ++demand[e];
  }
  for (auto [e, count] : demand) {
    if (Rational(count) > levels_.at(e)) return InjectionRefusal{e, count, levels_[e]};
  }
  return std::nullopt;
}

std::optional<InjectionRefusal> BucketState::inject(std::span<const Path> paths) {
  if (auto refusal = check_injection(paths)) return refusal;
  for (const auto& path : paths) {
    for (EdgeId e : path) levels_[e] -= Rational(1);
  }
  return std::nullopt;
}

GroupId BucketState::register_stall(const Packet& pkt, Round round) {
  if (pkt.absorbed()) throw ContractError("stall registered for absorbed packet " + std::to_string(pkt.id));
  AntitokenGroup g;
  g.id = static_cast<GroupId>(groups_.size());
  g.created = round;
  g.stalled_edge = pkt.path[pkt.next];
  g.packet = pkt.id;
  for (std::size_t i = pkt.next; i < pkt.path.size(); ++i) {
    g.members.push_back(Antitoken{pkt.path[i], type_.delay, g.id});
  }
  groups_.push_back(std::move(g));
  live_.push_back(groups_.back().id);
  return groups_.back().id;
}

void BucketState::apply_annihilation(AntitokenGroup& g, Round round, bool forced) {
  for (const auto& token : g.members) levels_[token.edge] -= type_.rate;
  g.alive = false;
  g.annihilated_at = round;
  g.forced = forced;
}

Annihilation BucketState::annihilate_group(GroupId id, Round round) {
  if (id < 0 || static_cast<std::size_t>(id) >= groups_.size()) {
    throw ContractError("unknown antitoken group " + std::to_string(id));
  }
  auto& g = groups_[static_cast<std::size_t>(id)];
  if (!g.alive) throw ContractError("antitoken group " + std::to_string(id) + " already annihilated");
  apply_annihilation(g, round, false);
  std::erase(live_, id);
  return {id, round, false};
}

std::vector<Annihilation> BucketState::tick_antitokens(Round round) {
  std::vector<Annihilation> fired;
  std::vector<GroupId> still_live;
  still_live.reserve(live_.size());
  for (GroupId id : live_) {
    auto& g = groups_[static_cast<std::size_t>(id)];
    for (auto& token : g.members) --token.value;
    if (g.members.front().value <= 0) {
      apply_annihilation(g, round, true);
      fired.push_back({id, round, true});
    } else {
      still_live.push_back(id);
    }
  }
  live_ = std::move(still_live);
  return fired;
}

}  // namespace dfsim
