#include "dfsim/reduction.hpp"

#include <algorithm>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "dfsim/engine.hpp"

namespace dfsim {

ReducedParams compute_reduced_params(const Rational& rate, std::int64_t burstiness, std::int64_t delay,
                                     std::int64_t tau) {
  if (rate <= Rational(0) || rate >= Rational(1)) {
    throw std::invalid_argument("reduction needs 0 < r < 1 (r' would leave (0, 1)), got r = " + rate.str());
  }
  if (burstiness < 1) throw std::invalid_argument("burstiness must be >= 1");
  if (delay < 1) throw std::invalid_argument("feedback delay must be >= 1");
  if (tau < 1) throw std::invalid_argument("tau must be >= 1");
  ReducedParams p;
  p.rate = (rate + Rational(tau)) / Rational(tau + 1);
  p.burstiness = rate * Rational(delay) + Rational(burstiness);
  p.source_rate = rate;
  p.source_burstiness = burstiness;
  p.delay = delay;
  p.tau = tau;
  return p;
}

std::optional<TauWindow> find_tau_violation(const StallTrace& stalls, std::int64_t tau) {
  for (std::size_t q = 0; q < stalls.queues(); ++q) {
    std::int64_t run = 0;
    for (Round t = 1; t <= stalls.horizon; ++t) {
      run = stalls.at(q, t) != 0 ? run + 1 : 0;
      if (run > tau) return TauWindow{static_cast<EdgeId>(q), t - tau, t};
    }
  }
  return std::nullopt;
}

TwoPriorityTrace build_two_priority_trace(const ExecutionTrace& src) {
  auto stalls = derive_stall_trace(src);
  if (auto bad = find_tau_violation(stalls, src.config.tau)) {
    throw TauConstraintError(*bad, "edge " + src.config.network.edge(bad->edge).id + " stalls in every round of [" +
                                       std::to_string(bad->first) + ", " + std::to_string(bad->last) +
                                       "], more than tau = " + std::to_string(src.config.tau));
  }
  TwoPriorityTrace two;
  for (const auto& rec : src.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* inj = std::get_if<InjectionEvent>(&ev)) {
        two.low.push_back({rec.round, inj->path, 0});
      } else if (const auto* st = std::get_if<StallEvent>(&ev)) {
        two.high.push_back({rec.round, Path{st->edge}, 1});
      }
    }
  }
  two.stall_free = two.high.empty();
  return two;
}

ScenarioConfig two_priority_config(const ExecutionTrace& src, const TwoPriorityTrace& two, BasePolicy base) {
  ScenarioConfig cfg = src.config;
  cfg.name = src.config.name + "/two-priority";
  cfg.policy = PolicyId{base, 2};
  cfg.enforce_tokens = false;
  cfg.promote_after_tau = false;
  cfg.stalls.clear();
  cfg.annihilations.clear();
  cfg.injection_generator.reset();
  cfg.stall_generator.reset();
  cfg.annihilation_generator.reset();
  // Promotions were caused by stalls, which the replay no longer has.
  for (const auto& rec : src.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* f = std::get_if<FailureEvent>(&ev); f && f->promoted) {
        cfg.failures.push_back({f->edge, rec.round, 0});
      }
    }
  }
  // Low-priority packets first within a round so their relative ids, and
  // hence every id tie-break, match the source.
  cfg.injections = two.low;
  cfg.injections.insert(cfg.injections.end(), two.high.begin(), two.high.end());
  std::stable_sort(cfg.injections.begin(), cfg.injections.end(), [](const auto& x, const auto& y) {
    return std::tie(x.round, x.priority) < std::tie(y.round, y.priority);
  });
  return cfg;
}

IntervalVerdict check_combined_congestion(const ExecutionTrace& src, const ReducedParams& params, bool exhaustive) {
  auto inj = derive_injection_trace(src);
  auto stalls = derive_stall_trace(src);
  for (std::size_t q = 0; q < inj.queues(); ++q) {
    for (std::size_t t = 0; t < inj.data[q].size(); ++t) inj.data[q][t] += stalls.data[q][t];
  }
  return check_rate_bound(inj.data, {}, params.rate, params.burstiness + Rational(params.tau), exhaustive);
}

ReductionVerdict verify_reduction(const ExecutionTrace& src) { return verify_reduction(src, src.config.policy.base); }

ReductionVerdict verify_reduction(const ExecutionTrace& src, BasePolicy policy) {
  ReductionVerdict verdict;
  verdict.params = compute_reduced_params(src.config.adversary.rate, src.config.adversary.burstiness,
                                          src.config.adversary.delay, src.config.tau);
  auto two = build_two_priority_trace(src);
  verdict.low_priority_packets = two.low.size();
  verdict.high_priority_packets = two.high.size();

  auto congestion = check_combined_congestion(src, verdict.params);
  verdict.congestion_bound = congestion.holds;
  verdict.congestion_worst = congestion.worst;

  auto note = [&verdict](Round round, const std::string& what) {
    if (!verdict.first_divergence) verdict.first_divergence = "round " + std::to_string(round) + ": " + what;
  };

  using Crossing = std::tuple<Round, EdgeId, PacketId>;
  std::set<Crossing> source_crossings;
  std::vector<PacketId> source_ids;  // source packets in injection order
  for (const auto& rec : src.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* tx = std::get_if<TransmissionEvent>(&ev)) source_crossings.emplace(rec.round, tx->edge, tx->packet);
      if (const auto* inj = std::get_if<InjectionEvent>(&ev)) source_ids.push_back(inj->packet);
    }
  }

  auto replay = run(two_priority_config(src, two, policy), EngineOptions{true, false});
  const auto edges = src.config.network.edge_count();
  std::map<PacketId, PacketId> to_source;
  std::map<PacketId, std::pair<Round, EdgeId>> high_pending;
  std::set<Crossing> replay_crossings;
  std::size_t next_low = 0;

  for (const auto& rec : replay.rounds) {
    const Round t = rec.round;
    std::vector<std::int64_t> high_at(edges, 0);
    for (const auto& [id, where] : high_pending) ++high_at[where.second];
    for (const auto& ev : rec.events) {
      if (const auto* inj = std::get_if<InjectionEvent>(&ev)) {
        if (inj->priority > 0) {
          high_pending[inj->packet] = {t, inj->path.front()};
          if (++high_at[inj->path.front()] > 1 && verdict.one_high_priority) {
            verdict.one_high_priority = false;
            note(t, "two high-priority packets at edge " + src.config.network.edge(inj->path.front()).id);
          }
        } else if (next_low < source_ids.size()) {
          to_source[inj->packet] = source_ids[next_low++];
        } else {
          verdict.transmissions_match = false;
          note(t, "replay injected more low-priority packets than the source");
        }
      } else if (const auto* tx = std::get_if<TransmissionEvent>(&ev)) {
        if (auto it = high_pending.find(tx->packet); it != high_pending.end()) {
          if (it->second.first != t && verdict.high_priority_slot) {
            verdict.high_priority_slot = false;
            note(t, "high-priority packet " + std::to_string(tx->packet) + " waited since round " +
                        std::to_string(it->second.first));
          }
          high_pending.erase(it);
        } else {
          replay_crossings.emplace(t, tx->edge, to_source.at(tx->packet));
        }
      }
    }
    for (const auto& [id, where] : high_pending) {
      if (where.first == t && verdict.high_priority_slot) {
        verdict.high_priority_slot = false;
        note(t, "high-priority packet " + std::to_string(id) + " was not transmitted in its injection round");
      }
    }
  }

  if (replay_crossings != source_crossings) {
    verdict.transmissions_match = false;
    std::vector<Crossing> diff;
    std::set_symmetric_difference(source_crossings.begin(), source_crossings.end(), replay_crossings.begin(),
                                  replay_crossings.end(), std::back_inserter(diff));
    const auto& [round, edge, packet] = diff.front();
    note(round, "crossing of packet " + std::to_string(packet) + " over edge " + src.config.network.edge(edge).id +
                    (source_crossings.count(diff.front()) != 0 ? " missing from the replay" : " absent in the source"));
  }
  return verdict;
}

}  // namespace dfsim
