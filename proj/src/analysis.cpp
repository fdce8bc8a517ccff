#include "dfsim/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dfsim/rng.hpp"

namespace dfsim {

std::string to_string(StabilityVerdict v) {
  return v == StabilityVerdict::kGrowth ? "growth-detected" : "bounded-within-horizon";
}

StabilityReport probe_series(std::span<const std::int64_t> occupancy, const ProbeParams& params) {
  if (params.window < 1 || params.k < 1 || params.g < 1) {
    throw std::invalid_argument("probe parameters W, k, g must all be >= 1");
  }
  const auto horizon = static_cast<Round>(occupancy.size());
  if (horizon < 2 * params.window * params.k) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " is shorter than 2*W*k = " +
                                std::to_string(2 * params.window * params.k));
  }
  StabilityReport report;
  report.horizon = horizon;
  report.params = params;
  const std::int64_t windows = horizon / params.window;
  report.offset = horizon - windows * params.window;
  for (std::int64_t j = 0; j < windows; ++j) {
    auto begin = occupancy.begin() + report.offset + j * params.window;
    report.window_max.push_back(*std::max_element(begin, begin + params.window));
  }
  report.overall_max = occupancy.empty() ? 0 : *std::max_element(occupancy.begin(), occupancy.end());

  const auto& m = report.window_max;
  const auto last = m.size() - 1;
  bool climbing = true;
  for (std::size_t i = 0; i < static_cast<std::size_t>(params.k); ++i) {
    if (m[last - i] < m[last - i - 1] + params.g) {
      climbing = false;
      break;
    }
  }
  if (climbing) {
    report.verdict = StabilityVerdict::kGrowth;
    for (std::size_t j = last - static_cast<std::size_t>(params.k); j <= last; ++j) report.witness.push_back(j);
  }
  return report;
}

std::vector<std::int64_t> total_series(const ExecutionTrace& trace) {
  std::vector<std::int64_t> q;
  q.reserve(trace.rounds.size());
  for (const auto& rec : trace.rounds) q.push_back(rec.total);
  return q;
}

std::vector<std::int64_t> queue_series(const ExecutionTrace& trace, EdgeId edge) {
  std::vector<std::int64_t> q;
  q.reserve(trace.rounds.size());
  for (const auto& rec : trace.rounds) {
    if (rec.queue_sizes.size() <= edge) throw std::invalid_argument("trace has no recorded queue sizes");
    q.push_back(rec.queue_sizes[edge]);
  }
  return q;
}

StabilityReport probe_stability(const ExecutionTrace& trace, const ProbeParams& params) {
  return probe_series(total_series(trace), params);
}

ReroutingGadget build_rerouting_gadget(const GadgetParams& params) {
  if (params.branches < 1 || params.burst < 1 || params.fail_duration < 1 || params.cycles < 1) {
    throw std::invalid_argument("gadget needs branches, burst, fail_duration and cycles >= 1");
  }
  ReroutingGadget g;
  g.params = params;
  // One round of slack past the longer of the burst and the outage: the
  // whole burst has crossed ei>ei' before the link comes back, and the
  // buckets refill to exactly `burst` by the next cycle.
  g.period = std::max(params.fail_duration, params.burst) + 1;

  auto& cfg = g.config;
  auto& net = cfg.network;
  cfg.name = "rerouting-gadget-n" + std::to_string(params.branches);
  for (std::int64_t i = 1; i <= params.branches; ++i) {
    auto s = std::to_string(i);
    net.add_node("e" + s);
    net.add_node("e" + s + "'");
    net.add_node("f" + s);
  }
  net.add_node("h");
  net.add_node("h'");
  std::vector<EdgeId> entry;
  std::vector<EdgeId> direct;
  for (std::int64_t i = 1; i <= params.branches; ++i) {
    auto s = std::to_string(i);
    entry.push_back(net.add_edge("e" + s + ">e" + s + "'", "e" + s, "e" + s + "'"));
    direct.push_back(net.add_edge("e" + s + "'>f" + s, "e" + s + "'", "f" + s));
    net.add_edge("e" + s + "'>h", "e" + s + "'", "h");
    net.add_edge("h'>f" + s, "h'", "f" + s);
  }
  g.shared_link = net.add_edge("h>h'", "h", "h'");

  cfg.adversary = AdversaryType{Rational(params.burst, g.period), params.burst, 1};
  cfg.tau = 1;
  cfg.tau_prime = 1;
  cfg.policy = PolicyId{params.policy, 1};
  cfg.horizon = (params.cycles + 1) * g.period - 1;
  cfg.seed = 0;

  for (std::int64_t c = 1; c <= params.cycles; ++c) {
    const Round start = c * g.period;
    for (std::size_t i = 0; i < entry.size(); ++i) {
      for (std::int64_t p = 0; p < params.burst; ++p) cfg.injections.push_back({start, Path{entry[i], direct[i]}, 0});
    }
    for (EdgeId d : direct) {
      cfg.failures.push_back({d, start + 1, 0});
      cfg.recoveries.push_back({d, start + g.period});
    }
    g.cycle_ends.push_back(start + g.period - 1);
  }
  // Sorted by round so the scripted order is the injection order.
  std::stable_sort(cfg.injections.begin(), cfg.injections.end(),
                   [](const auto& a, const auto& b) { return a.round < b.round; });
  return g;
}

std::vector<std::int64_t> cycle_end_lengths(const ReroutingGadget& gadget, const ExecutionTrace& trace) {
  auto series = queue_series(trace, gadget.shared_link);
  std::vector<std::int64_t> out;
  for (Round t : gadget.cycle_ends) {
    if (t >= 1 && t <= static_cast<Round>(series.size())) out.push_back(series[static_cast<std::size_t>(t - 1)]);
  }
  return out;
}

RerouteCount count_rerouted(const ExecutionTrace& trace) {
  RerouteCount c;
  c.cumulative.reserve(trace.rounds.size());
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* r = std::get_if<RerouteEvent>(&ev)) {
        ++c.per_failure[{r->failed_edge, r->failed_at}];
        ++c.total;
        c.last_reroute = rec.round;
      }
    }
    c.cumulative.push_back(c.total);
  }
  return c;
}

RerouteBoundReport check_reroute_bound(const ExecutionTrace& trace, Round settle_by) {
  RerouteBoundReport report;
  report.counts = count_rerouted(trace);
  std::map<PacketId, Round> injected;
  std::map<std::pair<EdgeId, Round>, Round> noticed;
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* i = std::get_if<InjectionEvent>(&ev)) {
        injected[i->packet] = rec.round;
      } else if (const auto* n = std::get_if<FailNotifiedEvent>(&ev)) {
        noticed[{n->edge, n->failed_at}] = rec.round;
      } else if (const auto* r = std::get_if<RerouteEvent>(&ev)) {
        auto it = noticed.find({r->failed_edge, r->failed_at});
        Round notice = it == noticed.end() ? rec.round : it->second;
        if (injected.at(r->packet) >= notice) {
          report.injected_before_notice = false;
          report.problems.push_back("packet " + std::to_string(r->packet) + " injected at round " +
                                    std::to_string(injected.at(r->packet)) + ", after the notice at round " +
                                    std::to_string(notice));
        }
      }
    }
  }
  if (report.counts.last_reroute > settle_by) {
    report.settled = false;
    report.problems.push_back("re-route at round " + std::to_string(report.counts.last_reroute) + " after round " +
                              std::to_string(settle_by));
  }
  return report;
}

TraceAudit audit_trace(const ExecutionTrace& trace) {
  TraceAudit audit;
  const auto& net = trace.config.network;
  const auto delay = trace.config.adversary.delay;
  auto flag = [&audit](bool& field, const std::string& what) {
    if (field) audit.problems.push_back(what);
    field = false;
  };
  std::vector<bool> failed(net.edge_count(), false);
  std::vector<bool> known(net.edge_count(), false);
  std::map<GroupId, Round> created;
  std::int64_t injected = 0;
  std::int64_t absorbed = 0;
  for (const auto& rec : trace.rounds) {
    const auto at = "round " + std::to_string(rec.round) + ": ";
    std::vector<int> crossings(net.edge_count(), 0);
    for (const auto& ev : rec.events) {
      if (const auto* f = std::get_if<FailureEvent>(&ev)) {
        failed[f->edge] = true;
        known[f->edge] = false;
      } else if (const auto* n = std::get_if<FailNotifiedEvent>(&ev)) {
        known[n->edge] = true;
      } else if (const auto* r = std::get_if<RecoveryEvent>(&ev)) {
        failed[r->edge] = false;
        known[r->edge] = false;
      } else if (const auto* i = std::get_if<InjectionEvent>(&ev)) {
        ++injected;
        for (EdgeId e : i->path) {
          if (known[e]) flag(audit.injections_avoid_notified, at + "injection over notified edge " + net.edge(e).id);
        }
      } else if (const auto* t = std::get_if<TransmissionEvent>(&ev)) {
        if (++crossings[t->edge] > 1) flag(audit.unit_capacity, at + "two crossings of " + net.edge(t->edge).id);
        if (failed[t->edge]) flag(audit.failed_edges_silent, at + "crossing of failed edge " + net.edge(t->edge).id);
      } else if (const auto* a = std::get_if<AbsorptionEvent>(&ev)) {
        (void)a;
        ++absorbed;
      } else if (const auto* g = std::get_if<GroupCreatedEvent>(&ev)) {
        created[g->group] = rec.round;
      } else if (const auto* x = std::get_if<AnnihilationEvent>(&ev)) {
        auto it = created.find(x->group);
        if (it == created.end() || rec.round > it->second + delay) {
          flag(audit.feedback_window, at + "group " + std::to_string(x->group) + " annihilated outside its window");
        } else {
          created.erase(it);
        }
      }
    }
    if (injected - absorbed != rec.total) {
      flag(audit.conservation, at + std::to_string(injected) + " injected, " + std::to_string(absorbed) +
                                   " absorbed, " + std::to_string(rec.total) + " queued");
    }
  }
  for (const auto& [group, round] : created) {
    if (round + delay <= trace.horizon()) {
      flag(audit.feedback_window, "group " + std::to_string(group) + " never annihilated");
    }
  }
  return audit;
}

ScenarioConfig gen_random_scenario(const RandomScenarioParams& params) {
  if (params.rate <= Rational(0) || params.rate >= Rational(1)) {
    throw std::invalid_argument("random scenarios need 0 < r < 1");
  }
  if (params.min_nodes < 2 || params.max_nodes < params.min_nodes) {
    throw std::invalid_argument("node bounds need 2 <= min_nodes <= max_nodes");
  }
  if (params.failures < 0) throw std::invalid_argument("failure count must be >= 0");

  Rng topo(params.seed, kStreamTopology);
  ScenarioConfig cfg;
  cfg.name = "random-" + std::to_string(params.seed);
  const auto n = static_cast<std::size_t>(topo.between(params.min_nodes, params.max_nodes));
  for (std::size_t v = 0; v < n; ++v) cfg.network.add_node("v" + std::to_string(v));

  // A random Hamiltonian cycle makes the graph strongly connected; extra
  // chords add alternative routes.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[topo.uniform(i + 1)]);
  std::set<std::pair<std::size_t, std::size_t>> arcs;
  for (std::size_t i = 0; i < n; ++i) arcs.emplace(order[i], order[(i + 1) % n]);
  // Failures need spare routes: run the cycle both ways.
  if (params.failures > 0) {
    for (std::size_t i = 0; i < n; ++i) arcs.emplace(order[(i + 1) % n], order[i]);
  }
  const auto extra = topo.between(0, static_cast<std::int64_t>(n));
  for (std::int64_t i = 0; i < extra; ++i) {
    auto a = topo.uniform(n);
    auto b = topo.uniform(n);
    if (a != b) arcs.emplace(a, b);
  }
  // Edge ids follow a shuffled order so index and name carry no structure.
  std::vector<std::pair<std::size_t, std::size_t>> arc_list(arcs.begin(), arcs.end());
  for (std::size_t i = arc_list.size() - 1; i > 0; --i) std::swap(arc_list[i], arc_list[topo.uniform(i + 1)]);
  for (std::size_t i = 0; i < arc_list.size(); ++i) {
    cfg.network.add_edge("e" + std::to_string(i), "v" + std::to_string(arc_list[i].first),
                         "v" + std::to_string(arc_list[i].second));
  }

  cfg.adversary = AdversaryType{params.rate, params.burstiness, params.delay};
  cfg.tau = params.tau;
  cfg.tau_prime = params.tau_prime;
  cfg.policy = params.policy;
  cfg.horizon = params.horizon;
  cfg.seed = params.seed;
  cfg.injection_generator = InjectionGenerator{params.attempts_per_round, params.max_path_length, 0};
  cfg.stall_generator = StallGenerator{params.stall_probability, params.tau};
  cfg.annihilation_generator = AnnihilationGenerator{};

  Rng fail(params.seed, kStreamFailures);
  // Greedy over a shuffled edge order, skipping any edge whose loss would
  // disconnect; a greedy pass can paint itself into a corner, so a short
  // run of fresh orders is tried before settling for fewer failures.
  std::vector<FailureSpec> best;
  for (int pass = 0; pass < 16 && static_cast<std::int64_t>(best.size()) < params.failures; ++pass) {
    std::vector<EdgeId> candidates(cfg.network.edge_count());
    std::iota(candidates.begin(), candidates.end(), EdgeId{0});
    for (std::size_t i = candidates.size() - 1; i > 0; --i) std::swap(candidates[i], candidates[fail.uniform(i + 1)]);
    std::vector<bool> blocked(cfg.network.edge_count(), false);
    std::vector<FailureSpec> chosen;
    for (EdgeId e : candidates) {
      if (static_cast<std::int64_t>(chosen.size()) == params.failures) break;
      blocked[e] = true;
      if (!strongly_connected(cfg.network, blocked)) {
        blocked[e] = false;
        continue;
      }
      Round when = fail.between(1, std::max<Round>(1, params.horizon / 2));
      chosen.push_back({e, when, fail.between(0, params.tau_prime)});
    }
    if (chosen.size() > best.size()) best = std::move(chosen);
  }
  cfg.failures = std::move(best);
  std::stable_sort(cfg.failures.begin(), cfg.failures.end(),
                   [](const auto& a, const auto& b) { return a.round < b.round; });
  cfg.validate();
  return cfg;
}

}  // namespace dfsim
