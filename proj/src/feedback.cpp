#include "dfsim/feedback.hpp"

#include <numeric>
#include <unordered_map>

#include "dfsim/errors.hpp"

namespace dfsim {
namespace {

struct GroupInfo {
  EdgeId stalled_edge = 0;
  Round created = 0;
  std::vector<EdgeId> members;
  Round annihilated = -1;
};

std::unordered_map<GroupId, GroupInfo> collect_groups(const ExecutionTrace& trace) {
  std::unordered_map<GroupId, GroupInfo> groups;
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* g = std::get_if<GroupCreatedEvent>(&ev)) {
        groups[g->group] = GroupInfo{g->stalled_edge, rec.round, g->members, -1};
      } else if (const auto* a = std::get_if<AnnihilationEvent>(&ev)) {
        groups.at(a->group).annihilated = rec.round;
      }
    }
  }
  return groups;
}

// Maximum-sum interval of one series, scanning left to right.
struct BestInterval {
  std::int64_t sum = 0;
  std::size_t first = 0;
  std::size_t last = 0;
};

BestInterval max_interval(std::span<const std::int64_t> xs) {
  BestInterval best{xs.front(), 0, 0};
  std::int64_t run = 0;
  std::size_t start = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (run <= 0) {
      run = xs[j];
      start = j;
    } else {
      run += xs[j];
    }
    if (run > best.sum) best = {run, start, j};
  }
  return best;
}

BestInterval max_interval_exhaustive(std::span<const std::int64_t> xs) {
  std::vector<std::int64_t> prefix(xs.size() + 1, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) prefix[i + 1] = prefix[i] + xs[i];
  BestInterval best{xs.front(), 0, 0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i; j < xs.size(); ++j) {
      std::int64_t s = prefix[j + 1] - prefix[i];
      if (s > best.sum) best = {s, i, j};
    }
  }
  return best;
}

void require_same_shape(std::size_t qa, Round ha, std::size_t qb, Round hb) {
  if (qa != qb || ha != hb) throw ContractError("traces do not share queues and horizon");
}

std::vector<std::vector<std::int64_t>> widen(const std::vector<std::vector<std::uint8_t>>& xs) {
  std::vector<std::vector<std::int64_t>> out;
  out.reserve(xs.size());
  for (const auto& row : xs) out.emplace_back(row.begin(), row.end());
  return out;
}

}  // namespace

IntervalVerdict check_rate_bound(std::span<const std::vector<std::int64_t>> counts,
                                 std::span<const std::vector<std::uint8_t>> throttled, const Rational& rate,
                                 const Rational& bound, bool exhaustive) {
  IntervalVerdict verdict;
  if (counts.empty() || counts.front().empty()) return verdict;
  if (!throttled.empty() && throttled.size() != counts.size()) throw ContractError("series count mismatch");
  const std::int64_t scale = std::lcm(rate.den(), bound.den());
  const std::int64_t scaled_rate = (rate * Rational(scale)).num();
  const std::int64_t scaled_bound = (bound * Rational(scale)).num();
  std::vector<std::int64_t> terms(counts.front().size());
  for (std::size_t q = 0; q < counts.size(); ++q) {
    if (counts[q].size() != terms.size()) throw ContractError("series length mismatch");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      std::int64_t open = throttled.empty() ? 1 : 1 - static_cast<std::int64_t>(throttled[q][t]);
      terms[t] = scale * counts[q][t] - scaled_rate * open;
    }
    BestInterval b = exhaustive ? max_interval_exhaustive(terms) : max_interval(terms);
    Rational excess(b.sum - scaled_bound, scale);
    if (!verdict.worst || excess > verdict.worst->excess) {
      verdict.worst = IntervalWitness{q, static_cast<Round>(b.first) + 1, static_cast<Round>(b.last) + 1, excess};
    }
  }
  verdict.holds = verdict.worst->excess <= Rational(0);
  return verdict;
}

namespace {

IntervalVerdict admissibility(const InjectionTrace& inj, const ReactiveTrace& reactive, const Rational& rate,
                              std::int64_t burstiness, bool exhaustive) {
  require_same_shape(inj.queues(), inj.horizon, reactive.queues(), reactive.horizon);
  return check_rate_bound(inj.data, reactive.data, rate, Rational(burstiness), exhaustive);
}

IntervalVerdict stall_bound(const StallTrace& stalls, const ReactiveTrace& reactive, std::int64_t delay,
                            bool exhaustive) {
  require_same_shape(stalls.queues(), stalls.horizon, reactive.queues(), reactive.horizon);
  auto diff = widen(stalls.data);
  for (std::size_t q = 0; q < diff.size(); ++q) {
    for (std::size_t t = 0; t < diff[q].size(); ++t) diff[q][t] -= reactive.data[q][t];
  }
  return check_rate_bound(diff, {}, Rational(0), Rational(delay), exhaustive);
}

}  // namespace

StallTrace derive_stall_trace(const ExecutionTrace& trace) {
  StallTrace w(trace.config.network.edge_count(), trace.horizon());
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* s = std::get_if<StallEvent>(&ev)) w.at(s->edge, rec.round) = 1;
    }
  }
  return w;
}

NotificationSchedule derive_notification_schedule(const ExecutionTrace& trace) {
  NotificationSchedule schedule;
  schedule.horizon = trace.horizon();
  schedule.delay = trace.config.adversary.delay;
  schedule.arrival.resize(trace.config.network.edge_count());
  for (const auto& [id, g] : collect_groups(trace)) {
    Round arrival = g.annihilated;
    if (arrival < 0) {
      if (g.created + schedule.delay <= schedule.horizon) {
        throw ScenarioError(g.created + schedule.delay,
                            "antitoken group " + std::to_string(id) + " outlived its feedback deadline");
      }
      arrival = g.created + schedule.delay;
    }
    if (arrival < g.created || arrival > g.created + schedule.delay) {
      throw ScenarioError(arrival, "feedback for group " + std::to_string(id) + " outside its delay window");
    }
    schedule.arrival[g.stalled_edge][g.created] = arrival;
  }
  return schedule;
}

DelayedCountTrace delayed_counts(const NotificationSchedule& schedule) {
  DelayedCountTrace counts(schedule.arrival.size(), schedule.horizon);
  for (std::size_t q = 0; q < schedule.arrival.size(); ++q) {
    for (auto [stalled, arrived] : schedule.arrival[q]) {
      if (arrived <= schedule.horizon) ++counts.at(q, arrived);
    }
  }
  return counts;
}

DelayedCountTrace bucket_feedback_counts(const ExecutionTrace& trace) {
  DelayedCountTrace counts(trace.config.network.edge_count(), trace.horizon());
  for (const auto& [id, g] : collect_groups(trace)) {
    if (g.annihilated < 0) continue;
    for (EdgeId e : g.members) ++counts.at(e, g.annihilated);
  }
  return counts;
}

InjectionTrace derive_injection_trace(const ExecutionTrace& trace) {
  InjectionTrace inj(trace.config.network.edge_count(), trace.horizon());
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* i = std::get_if<InjectionEvent>(&ev)) {
        for (EdgeId e : i->path) ++inj.at(e, rec.round);
      }
    }
  }
  return inj;
}

std::vector<std::uint8_t> reactive_series(std::span<const std::int64_t> counts) {
  const auto horizon = static_cast<std::int64_t>(counts.size());
  std::vector<std::uint8_t> s(counts.size(), 0);
  std::int64_t next_free = 1;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    std::int64_t n = counts[static_cast<std::size_t>(t - 1)];
    if (n == 0) continue;
    next_free = std::max(t, next_free);
    for (std::int64_t k = next_free; k < next_free + n && k <= horizon; ++k) s[static_cast<std::size_t>(k - 1)] = 1;
    // Advance past the whole block so no round is claimed twice.
    next_free += n;
  }
  return s;
}

ReactiveTrace compute_reactive(const DelayedCountTrace& counts) {
  ReactiveTrace s(counts.queues(), counts.horizon);
  for (std::size_t q = 0; q < counts.queues(); ++q) s.data[q] = reactive_series(counts.series(q));
  return s;
}

IntervalVerdict check_admissibility(const InjectionTrace& inj, const ReactiveTrace& reactive, const Rational& rate,
                                    std::int64_t burstiness) {
  return admissibility(inj, reactive, rate, burstiness, false);
}

IntervalVerdict check_admissibility_exhaustive(const InjectionTrace& inj, const ReactiveTrace& reactive,
                                               const Rational& rate, std::int64_t burstiness) {
  return admissibility(inj, reactive, rate, burstiness, true);
}

IntervalVerdict check_regular_admissibility(const InjectionTrace& inj, const Rational& rate, std::int64_t burstiness) {
  ReactiveTrace none(inj.queues(), inj.horizon);
  return admissibility(inj, none, rate, burstiness, false);
}

IntervalVerdict check_stall_bound(const StallTrace& stalls, const ReactiveTrace& reactive, std::int64_t delay) {
  return stall_bound(stalls, reactive, delay, false);
}

IntervalVerdict check_stall_bound_exhaustive(const StallTrace& stalls, const ReactiveTrace& reactive,
                                             std::int64_t delay) {
  return stall_bound(stalls, reactive, delay, true);
}

IntervalVerdict check_trace_admissibility(const ExecutionTrace& trace) {
  auto reactive = compute_reactive(bucket_feedback_counts(trace));
  return check_admissibility(derive_injection_trace(trace), reactive, trace.config.adversary.rate,
                             trace.config.adversary.burstiness);
}

IntervalVerdict check_trace_regular(const ExecutionTrace& trace) {
  return check_regular_admissibility(derive_injection_trace(trace), trace.config.adversary.rate,
                                     trace.config.adversary.burstiness);
}

IntervalVerdict check_trace_stall_bound(const ExecutionTrace& trace, bool exhaustive) {
  auto reactive = compute_reactive(delayed_counts(derive_notification_schedule(trace)));
  auto stalls = derive_stall_trace(trace);
  return exhaustive ? check_stall_bound_exhaustive(stalls, reactive, trace.config.adversary.delay)
                    : check_stall_bound(stalls, reactive, trace.config.adversary.delay);
}

}  // namespace dfsim
