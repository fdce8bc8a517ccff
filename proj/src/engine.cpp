#include "dfsim/engine.hpp"

#include <algorithm>
#include <unordered_set>

#include "dfsim/errors.hpp"

namespace dfsim {

Engine::Engine(ScenarioConfig config, EngineOptions options)
    : config_(std::move(config)),
      options_(options),
      buckets_(config_.network.edge_count(), config_.adversary),
      queues_(config_.network.edge_count()),
      failed_(config_.network.edge_count(), false),
      visible_(config_.network.edge_count(), false),
      failed_at_(config_.network.edge_count(), -1),
      stall_run_(config_.network.edge_count(), 0),
      injection_rng_(config_.seed, kStreamInjections),
      annihilation_rng_(config_.seed, kStreamAnnihilations) {
  config_.validate();
  expand_stalls();
  for (const auto& a : config_.annihilations) chosen_delay_[{a.edge, a.round}] = a.delay;
  for (std::size_t i = 0; i < config_.injections.size(); ++i) scripted_[config_.injections[i].round].push_back(i);
  for (const auto& f : config_.failures) failures_[f.round].push_back(f);
  for (const auto& r : config_.recoveries) recoveries_[r.round].push_back(r.edge);
  trace_.config = config_;
}

void Engine::expand_stalls() {
  const auto edges = config_.network.edge_count();
  const auto horizon = static_cast<std::size_t>(config_.horizon);
  stalled_.assign(edges, std::vector<std::uint8_t>(horizon + 1, 0));
  for (const auto& s : config_.stalls) {
    for (Round t : s.rounds) {
      if (t <= config_.horizon) stalled_[s.edge][static_cast<std::size_t>(t)] = 1;
    }
  }
  if (!config_.stall_generator) return;
  const auto& gen = *config_.stall_generator;
  Rng rng(config_.seed, kStreamStalls);
  for (std::size_t e = 0; e < edges; ++e) {
    std::int64_t run = 0;
    for (std::size_t t = 1; t <= horizon; ++t) {
      if (stalled_[e][t] != 0) {
        ++run;
        continue;
      }
      bool stall = rng.chance(gen.probability);
      if (stall && run < gen.max_consecutive) {
        stalled_[e][t] = 1;
        ++run;
      } else {
        run = 0;
      }
    }
  }
}

PacketView Engine::view_of(PacketId id) const {
  const Packet& p = packets_[static_cast<std::size_t>(id)];
  PacketView v;
  v.id = id;
  v.arrival = arrival_[static_cast<std::size_t>(id)];
  v.injected = p.injected_at;
  v.traversed = static_cast<std::int64_t>(p.next);
  v.remaining = static_cast<std::int64_t>(p.remaining());
  v.previous_slowness = p.next == 0 ? 0 : config_.network.edge(p.path[p.next - 1]).slowness;
  v.priority = p.priority;
  return v;
}

void Engine::enqueue(PacketId id, Round arrival) {
  arrival_[static_cast<std::size_t>(id)] = arrival;
  EdgeId e = packets_[static_cast<std::size_t>(id)].next_edge();
  queues_[e].emplace(policy_key(config_.policy, view_of(id)), id);
}

std::vector<PacketId> Engine::queue_in_arrival_order(EdgeId e) const {
  std::vector<PacketId> ids;
  for (const auto& entry : queues_.at(e)) ids.push_back(entry.second);
  std::sort(ids.begin(), ids.end(), [this](PacketId a, PacketId b) {
    auto ra = arrival_[static_cast<std::size_t>(a)];
    auto rb = arrival_[static_cast<std::size_t>(b)];
    return ra != rb ? ra < rb : a < b;
  });
  return ids;
}

std::int64_t Engine::queued_count() const {
  std::int64_t n = 0;
  for (const auto& q : queues_) n += static_cast<std::int64_t>(q.size());
  return n;
}

std::int64_t Engine::choose_delay(EdgeId edge, Round round) {
  auto it = chosen_delay_.find({edge, round});
  if (it != chosen_delay_.end()) return it->second;
  if (config_.annihilation_generator) return annihilation_rng_.between(0, config_.adversary.delay);
  return config_.adversary.delay;
}

Path Engine::propose_path() {
  const auto& gen = *config_.injection_generator;
  const auto& net = config_.network;
  Path path;
  auto length = 1 + static_cast<std::int64_t>(injection_rng_.uniform(static_cast<std::uint64_t>(gen.max_path_length)));
  auto node = static_cast<NodeId>(injection_rng_.uniform(net.node_count()));
  std::vector<bool> visited(net.node_count(), false);
  visited[node] = true;
  std::vector<EdgeId> options;
  while (static_cast<std::int64_t>(path.size()) < length) {
    options.clear();
    for (EdgeId e : net.out_edges(node)) {
      if (!visible_[e] && !visited[net.edge(e).head]) options.push_back(e);
    }
    if (options.empty()) break;
    EdgeId pick = options[injection_rng_.uniform(options.size())];
    path.push_back(pick);
    node = net.edge(pick).head;
    visited[node] = true;
  }
  return path;
}

RoundReport Engine::step() {
  if (done()) throw ContractError("step past the horizon");
  const Round t = ++round_;
  const auto& net = config_.network;
  RoundReport report;
  report.round = t;
  RoundRecord rec;
  rec.round = t;
  auto emit = [&](Event ev) {
    hash_event(digest_, t, ev);
    if (options_.record_events) rec.events.push_back(std::move(ev));
  };

  // 1-2: tokens, then feedback.
  buckets_.tick_buckets();
  for (const auto& a : buckets_.tick_antitokens(t)) emit(AnnihilationEvent{a.group, true});
  if (auto it = voluntary_.find(t); it != voluntary_.end()) {
    for (GroupId g : it->second) {
      if (!buckets_.group(g).alive) continue;
      buckets_.annihilate_group(g, t);
      emit(AnnihilationEvent{g, false});
    }
    voluntary_.erase(it);
  }

  // 3: permanent failures and what the adversary learns about them.
  auto start_failure = [&](EdgeId e, std::int64_t notify_delay, bool promoted) {
    if (failed_[e]) return;
    failed_[e] = true;
    visible_[e] = false;
    failed_at_[e] = t;
    emit(FailureEvent{e, promoted});
    notifications_[t + notify_delay].emplace_back(e, t);
  };
  if (auto it = promotions_.find(t); it != promotions_.end()) {
    for (EdgeId e : it->second) start_failure(e, 0, true);
    promotions_.erase(it);
  }
  if (auto it = failures_.find(t); it != failures_.end()) {
    for (const auto& f : it->second) start_failure(f.edge, f.notify_delay, false);
  }
  if (auto it = notifications_.find(t); it != notifications_.end()) {
    for (auto [e, when] : it->second) {
      if (failed_[e] && failed_at_[e] == when && !visible_[e]) {
        visible_[e] = true;
        emit(FailNotifiedEvent{e, when});
      }
    }
    notifications_.erase(it);
  }
  if (auto it = recoveries_.find(t); it != recoveries_.end()) {
    for (EdgeId e : it->second) {
      if (!failed_[e]) continue;
      emit(RecoveryEvent{e, failed_at_[e]});
      failed_[e] = false;
      visible_[e] = false;
    }
  }

  // 4: injections.
  std::vector<Path> batch;
  std::vector<std::uint8_t> priorities;
  if (auto it = scripted_.find(t); it != scripted_.end()) {
    for (std::size_t idx : it->second) {
      const auto& inj = config_.injections[idx];
      for (EdgeId e : inj.path) {
        if (visible_[e]) {
          throw ScenarioError(t, "injection over edge " + net.edge(e).id + " after its failure was notified");
        }
      }
      batch.push_back(inj.path);
      priorities.push_back(inj.priority);
    }
    if (config_.enforce_tokens) {
      if (auto refusal = buckets_.check_injection(batch)) {
        throw ScenarioError(t, "injection refused: edge " + net.edge(refusal->edge).id + " needs " +
                                   std::to_string(refusal->requested) + " tokens but holds " +
                                   refusal->available.str());
      }
    }
  }
  if (config_.injection_generator && (config_.injection_generator->until == 0 || t <= config_.injection_generator->until)) {
    std::map<EdgeId, std::int64_t> demand;
    for (const auto& p : batch) {
      for (EdgeId e : p) ++demand[e];
    }
    for (std::int64_t i = 0; i < config_.injection_generator->attempts_per_round; ++i) {
      Path p = propose_path();
      if (p.empty()) continue;
      bool affordable = true;
      if (config_.enforce_tokens) {
        for (EdgeId e : p) {
          if (Rational(demand[e] + 1) > buckets_.level(e)) {
            affordable = false;
            break;
          }
        }
      }
      if (!affordable) continue;
      for (EdgeId e : p) ++demand[e];
      batch.push_back(std::move(p));
      priorities.push_back(0);
    }
  }
  if (config_.enforce_tokens && !batch.empty()) buckets_.inject(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Packet pkt;
    pkt.id = static_cast<PacketId>(packets_.size());
    pkt.injected_at = t;
    pkt.path = batch[i];
    pkt.original_path = batch[i];
    pkt.priority = priorities[i];
    packets_.push_back(std::move(pkt));
    arrival_.push_back(t);
    emit(InjectionEvent{packets_.back().id, batch[i], priorities[i]});
    enqueue(packets_.back().id, t);
    ++report.injected;
  }

  // 5: one selection per live edge; crossings land after the sweep.
  std::vector<PacketId> moved;
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    if (failed_[e] || queues_[e].empty()) {
      stall_run_[e] = 0;
      continue;
    }
    PacketId chosen = queues_[e].begin()->second;
    Packet& pkt = packets_[static_cast<std::size_t>(chosen)];
    if (stalled_[e][static_cast<std::size_t>(t)] != 0) {
      emit(StallEvent{chosen, e});
      GroupId g = buckets_.register_stall(pkt, t);
      std::vector<EdgeId> members;
      for (const auto& tok : buckets_.group(g).members) members.push_back(tok.edge);
      emit(GroupCreatedEvent{g, e, chosen, std::move(members)});
      std::int64_t delay = choose_delay(e, t);
      if (delay == 0) {
        buckets_.annihilate_group(g, t);
        emit(AnnihilationEvent{g, false});
      } else if (delay < config_.adversary.delay) {
        voluntary_[t + delay].push_back(g);
      }
      ++report.stalled;
      if (config_.promote_after_tau && ++stall_run_[e] >= config_.tau) promotions_[t + 1].push_back(e);
      continue;
    }
    stall_run_[e] = 0;
    queues_[e].erase(queues_[e].begin());
    emit(TransmissionEvent{chosen, e});
    ++report.transmitted;
    pkt = advance(std::move(pkt));
    if (pkt.absorbed()) {
      emit(AbsorptionEvent{chosen});
      ++absorbed_;
      ++report.absorbed;
    } else {
      moved.push_back(chosen);
    }
  }
  for (PacketId id : moved) enqueue(id, t);

  // 6: re-route around failures the adversary knows about.
  std::vector<PacketId> stranded;
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    if (!(failed_[e] && visible_[e]) || queues_[e].empty()) continue;
    for (const auto& entry : queues_[e]) stranded.push_back(entry.second);
    queues_[e].clear();
  }
  for (PacketId id : stranded) {
    Packet& pkt = packets_[static_cast<std::size_t>(id)];
    EdgeId failed_edge = pkt.next_edge();
    Path old_suffix(pkt.path.begin() + static_cast<std::ptrdiff_t>(pkt.next), pkt.path.end());
    pkt = reroute(net, std::move(pkt), visible_, t);
    Path new_suffix(pkt.path.begin() + static_cast<std::ptrdiff_t>(pkt.next), pkt.path.end());
    emit(RerouteEvent{id, failed_edge, failed_at_[failed_edge], std::move(old_suffix), std::move(new_suffix)});
    ++report.rerouted;
    if (pkt.absorbed()) {
      emit(AbsorptionEvent{id});
      ++absorbed_;
      ++report.absorbed;
    } else {
      enqueue(id, t);
    }
  }

  // 7: snapshot.
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    auto len = static_cast<std::int64_t>(queues_[e].size());
    digest_.add(len);
    report.total += len;
    if (options_.record_queue_sizes) rec.queue_sizes.push_back(len);
  }
  rec.total = report.total;
  trace_.rounds.push_back(std::move(rec));
  return report;
}

ExecutionTrace Engine::take_trace() && {
  trace_.digest = digest_.value();
  return std::move(trace_);
}

ExecutionTrace run(const ScenarioConfig& config, EngineOptions options) {
  Engine engine(config, options);
  while (!engine.done()) engine.step();
  return std::move(engine).take_trace();
}

Packet reroute(const Network& net, Packet pkt, const std::vector<bool>& blocked, Round round) {
  if (pkt.absorbed()) throw ContractError("re-route of absorbed packet " + std::to_string(pkt.id));
  NodeId here = current_node(net, pkt);
  NodeId dest = net.edge(pkt.path.back()).head;
  auto suffix = shortest_path(net, here, dest, blocked);
  if (!suffix) {
    throw ScenarioError(round, "packet " + std::to_string(pkt.id) + " cannot be re-routed from node " +
                                   net.node_name(here) + " to " + net.node_name(dest) +
                                   ": failure pattern disconnects them");
  }
  pkt.path.resize(pkt.next);
  pkt.path.insert(pkt.path.end(), suffix->begin(), suffix->end());
  pkt.rerouted = true;
  return pkt;
}

ScenarioConfig replay_config(const ExecutionTrace& trace) {
  ScenarioConfig cfg = trace.config;
  cfg.injections.clear();
  cfg.stalls.clear();
  cfg.annihilations.clear();
  cfg.injection_generator.reset();
  cfg.stall_generator.reset();
  cfg.annihilation_generator.reset();

  std::map<EdgeId, std::vector<Round>> stalls;
  std::map<GroupId, std::pair<EdgeId, Round>> groups;
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* inj = std::get_if<InjectionEvent>(&ev)) {
        cfg.injections.push_back({rec.round, inj->path, inj->priority});
      } else if (const auto* st = std::get_if<StallEvent>(&ev)) {
        stalls[st->edge].push_back(rec.round);
      } else if (const auto* g = std::get_if<GroupCreatedEvent>(&ev)) {
        groups[g->group] = {g->stalled_edge, rec.round};
      } else if (const auto* a = std::get_if<AnnihilationEvent>(&ev)) {
        auto [edge, created] = groups.at(a->group);
        cfg.annihilations.push_back({edge, created, rec.round - created});
        groups.erase(a->group);
      }
    }
  }
  for (auto& [edge, rounds] : stalls) cfg.stalls.push_back({edge, std::move(rounds)});
  // Groups still alive at the horizon keep the forced default.
  std::sort(cfg.annihilations.begin(), cfg.annihilations.end(), [](const auto& a, const auto& b) {
    return a.round != b.round ? a.round < b.round : a.edge < b.edge;
  });
  return cfg;
}

RecoveryVerdict validate_recovery(const ExecutionTrace& trace) {
  std::map<std::pair<EdgeId, Round>, std::vector<PacketId>> rerouted_by;
  std::map<PacketId, Round> absorbed_at;
  std::vector<std::tuple<EdgeId, Round, Round>> recoveries;
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* r = std::get_if<RerouteEvent>(&ev)) {
        rerouted_by[{r->failed_edge, r->failed_at}].push_back(r->packet);
      } else if (const auto* a = std::get_if<AbsorptionEvent>(&ev)) {
        absorbed_at[a->packet] = rec.round;
      } else if (const auto* rc = std::get_if<RecoveryEvent>(&ev)) {
        recoveries.emplace_back(rc->edge, rc->failed_at, rec.round);
      }
    }
  }
  RecoveryVerdict verdict;
  for (auto [edge, failed_at, recovered_at] : recoveries) {
    auto it = rerouted_by.find({edge, failed_at});
    if (it == rerouted_by.end()) continue;
    std::unordered_set<PacketId> seen;
    for (PacketId p : it->second) {
      if (!seen.insert(p).second) continue;
      auto abs = absorbed_at.find(p);
      Round when = abs == absorbed_at.end() ? -1 : abs->second;
      if (when < 0 || when >= recovered_at) {
        verdict.valid = false;
        verdict.violations.push_back({edge, recovered_at, failed_at, p, when});
      }
    }
  }
  return verdict;
}

}  // namespace dfsim
