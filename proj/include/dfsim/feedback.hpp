#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dfsim/network.hpp"
#include "dfsim/rational.hpp"
#include "dfsim/trace.hpp"

namespace dfsim {

/// One integer series per queue over rounds 1..horizon. The tag keeps the
/// different kinds of series from being mixed up.
template <class Tag, class T = std::int64_t>
struct QueueSeries {
  Round horizon = 0;
  std::vector<std::vector<T>> data;

  QueueSeries() = default;
  QueueSeries(std::size_t queues, Round h) : horizon(h), data(queues, std::vector<T>(static_cast<std::size_t>(h), T{})) {}

  [[nodiscard]] std::size_t queues() const { return data.size(); }
  [[nodiscard]] T at(std::size_t q, Round t) const { return data[q][static_cast<std::size_t>(t - 1)]; }
  T& at(std::size_t q, Round t) { return data[q][static_cast<std::size_t>(t - 1)]; }
  [[nodiscard]] std::span<const T> series(std::size_t q) const { return data[q]; }
};

struct StallTag {};
struct DelayedCountTag {};
struct ReactiveTag {};
struct InjectionTag {};

/// 1 where some packet at the queue stalled that round.
using StallTrace = QueueSeries<StallTag, std::uint8_t>;
/// Feedback arrivals per round (how many stall notifications land).
using DelayedCountTrace = QueueSeries<DelayedCountTag>;
/// 1 on the rounds where the adversary is throttled by received feedback.
using ReactiveTrace = QueueSeries<ReactiveTag, std::uint8_t>;
/// Packets injected per round whose path crosses the queue.
using InjectionTrace = QueueSeries<InjectionTag>;

/// For every stalled round of a queue, the round its feedback arrived.
struct NotificationSchedule {
  Round horizon = 0;
  std::int64_t delay = 0;
  std::vector<std::map<Round, Round>> arrival;
};

StallTrace derive_stall_trace(const ExecutionTrace& trace);

/// Arrival of each stall's feedback is the annihilation round of the
/// antitoken group that stall created. A group still alive after
/// created + delay <= horizon is a model violation (ScenarioError); groups
/// whose deadline lies past the horizon arrive at their forced expiry.
NotificationSchedule derive_notification_schedule(const ExecutionTrace& trace);

/// Preimage counts of a notification schedule, restricted to the horizon.
DelayedCountTrace delayed_counts(const NotificationSchedule& schedule);

/// Antitokens annihilated per edge per round, over every group with a member
/// on that edge. This is the feedback that actually drains the edge's bucket,
/// and includes stalls that happened further upstream on a packet's path.
DelayedCountTrace bucket_feedback_counts(const ExecutionTrace& trace);

InjectionTrace derive_injection_trace(const ExecutionTrace& trace);

/// Reactive indicator of one queue: each notification claims the next
/// unclaimed round at or after its arrival. Marks falling past the end of
/// `counts` are dropped.
std::vector<std::uint8_t> reactive_series(std::span<const std::int64_t> counts);
ReactiveTrace compute_reactive(const DelayedCountTrace& counts);

/// Interval witness: the queue, the closed round range, and how far the
/// inequality's left side exceeds its right side (positive = violated).
struct IntervalWitness {
  std::size_t queue = 0;
  Round first = 0;
  Round last = 0;
  Rational excess;
};

struct IntervalVerdict {
  bool holds = true;
  /// Interval of maximal excess, when at least one interval exists.
  std::optional<IntervalWitness> worst;
};

/// General interval scan behind every checker below. For each queue q and
/// contiguous interval T:
///   sum_T counts[q] <= rate * sum_T (1 - throttled[q]) + bound
/// An empty `throttled` means no round is throttled. Exact: all terms are
/// scaled to a common integer denominator. `exhaustive` enumerates every
/// interval instead of the linear maximum-subarray scan.
IntervalVerdict check_rate_bound(std::span<const std::vector<std::int64_t>> counts,
                                 std::span<const std::vector<std::uint8_t>> throttled, const Rational& rate,
                                 const Rational& bound, bool exhaustive = false);

/// For every queue and contiguous interval T:
///   sum_T injections <= rate * sum_T (1 - reactive) + burstiness.
/// Linear-time maximum-subarray scan in exact integer arithmetic.
IntervalVerdict check_admissibility(const InjectionTrace& inj, const ReactiveTrace& reactive, const Rational& rate,
                                    std::int64_t burstiness);
/// Same inequality, every interval enumerated explicitly.
IntervalVerdict check_admissibility_exhaustive(const InjectionTrace& inj, const ReactiveTrace& reactive,
                                               const Rational& rate, std::int64_t burstiness);

/// Plain leaky-bucket condition: at most rate * |T| + burstiness packets
/// crossing any queue in any interval.
IntervalVerdict check_regular_admissibility(const InjectionTrace& inj, const Rational& rate, std::int64_t burstiness);

/// For every queue and interval: sum_T stalls <= sum_T reactive + delay.
IntervalVerdict check_stall_bound(const StallTrace& stalls, const ReactiveTrace& reactive, std::int64_t delay);
IntervalVerdict check_stall_bound_exhaustive(const StallTrace& stalls, const ReactiveTrace& reactive,
                                             std::int64_t delay);

/// Trace-level pipelines used by the checker CLI and the test suites.
IntervalVerdict check_trace_admissibility(const ExecutionTrace& trace);
IntervalVerdict check_trace_regular(const ExecutionTrace& trace);
IntervalVerdict check_trace_stall_bound(const ExecutionTrace& trace, bool exhaustive = false);

}  // namespace dfsim
