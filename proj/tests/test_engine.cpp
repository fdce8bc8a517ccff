#include <set>

#include "doctest.h"
#include "dfsim/analysis.hpp"
#include "dfsim/engine.hpp"
#include "dfsim/errors.hpp"
#include "dfsim/feedback.hpp"
#include "support.hpp"

using namespace dfsim;
using testing::edges_of;
using testing::events_of;
using testing::random_config;

namespace {

ScenarioConfig two_node(Round horizon) {
  ScenarioConfig c;
  c.network.add_node("a");
  c.network.add_node("b");
  c.network.add_edge("ab", "a", "b");
  c.adversary = AdversaryType{Rational(1), 1, 2};
  c.horizon = horizon;
  return c;
}

// u -> v directly ("uv") or through w ("uw", "wv").
ScenarioConfig detour(Round horizon) {
  ScenarioConfig c;
  for (auto n : {"u", "v", "w"}) c.network.add_node(n);
  c.network.add_edge("uv", "u", "v");
  c.network.add_edge("uw", "u", "w");
  c.network.add_edge("wv", "w", "v");
  c.adversary = AdversaryType{Rational(1), 3, 2};
  c.tau = 2;
  c.tau_prime = 2;
  c.horizon = horizon;
  return c;
}

}  // namespace

TEST_CASE("single packet crosses and is absorbed in its injection round") {
  auto c = two_node(3);
  c.injections.push_back({1, Path{0}, 0});
  auto trace = run(c);
  REQUIRE(trace.rounds.size() == 3);
  CHECK(events_of<AbsorptionEvent>(trace).size() == 1);
  CHECK(events_of<AbsorptionEvent>(trace)[0].first == 1);
  CHECK(trace.rounds[0].total == 0);
  CHECK(trace.rounds[0].queue_sizes == std::vector<std::int64_t>{0});
}

TEST_CASE("a stalled packet waits and leaves a one-member group") {
  auto c = two_node(3);
  c.injections.push_back({1, Path{0}, 0});
  c.stalls.push_back({0, {1}});
  auto trace = run(c);
  auto stalls = events_of<StallEvent>(trace);
  REQUIRE(stalls.size() == 1);
  CHECK(stalls[0].first == 1);
  auto groups = events_of<GroupCreatedEvent>(trace);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].second.members == Path{0});
  CHECK(trace.rounds[0].total == 1);
  CHECK(events_of<AbsorptionEvent>(trace)[0].first == 2);
  // Default delay is the full delta: forced expiry two rounds later.
  auto ann = events_of<AnnihilationEvent>(trace);
  REQUIRE(ann.size() == 1);
  CHECK(ann[0].first == 3);
  CHECK(ann[0].second.forced);
}

TEST_CASE("a stall on the second edge only charges the edges still ahead") {
  auto c = testing::line_scenario(2, 4);
  c.adversary = AdversaryType{Rational(1), 2, 2};
  c.injections.push_back({1, edges_of(c.network, {"e1", "e2"}), 0});
  c.stalls.push_back({*c.network.find_edge("e2"), {2}});
  auto trace = run(c);
  auto groups = events_of<GroupCreatedEvent>(trace);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].first == 2);
  CHECK(groups[0].second.members == edges_of(c.network, {"e2"}));
  CHECK(events_of<AbsorptionEvent>(trace)[0].first == 3);
}

TEST_CASE("voluntary annihilation delays are honoured") {
  auto c = two_node(6);
  c.adversary.delay = 3;
  c.injections.push_back({1, Path{0}, 0});
  c.stalls.push_back({0, {1, 2}});
  c.annihilations.push_back({0, 1, 0});  // same round
  c.annihilations.push_back({0, 2, 2});  // two rounds later, voluntary
  auto trace = run(c);
  auto ann = events_of<AnnihilationEvent>(trace);
  REQUIRE(ann.size() == 2);
  CHECK(ann[0].first == 1);
  CHECK_FALSE(ann[0].second.forced);
  CHECK(ann[1].first == 4);
  CHECK_FALSE(ann[1].second.forced);
}

TEST_CASE("run edge cases and scenario errors") {
  SUBCASE("horizon 0 gives an empty trace") { CHECK(run(two_node(0)).rounds.empty()); }
  SUBCASE("an unaffordable injection names edge and round") {
    auto c = testing::line_scenario(1, 3);  // r = 1/2: one token only by round 2
    c.injections.push_back({1, Path{0}, 0});
    try {
      run(c);
      FAIL("expected a scenario error");
    } catch (const ScenarioError& e) {
      CHECK(e.round() == 1);
      CHECK(std::string(e.what()).find("e1") != std::string::npos);
    }
  }
  SUBCASE("joint demand beyond the bucket is refused") {
    auto c = two_node(2);
    c.injections.push_back({1, Path{0}, 0});
    c.injections.push_back({1, Path{0}, 0});
    CHECK_THROWS_AS(run(c), ScenarioError);
  }
  SUBCASE("injecting over a notified failure is refused") {
    auto c = detour(4);
    c.failures.push_back({0, 1, 0});
    c.injections.push_back({2, Path{0}, 0});
    CHECK_THROWS_AS(run(c), ScenarioError);
  }
  SUBCASE("a re-route with no surviving route aborts") {
    auto c = two_node(4);
    c.tau_prime = 1;
    c.injections.push_back({1, Path{0}, 0});
    c.stalls.push_back({0, {1}});
    c.failures.push_back({0, 2, 0});
    CHECK_THROWS_AS(run(c), ScenarioError);
  }
  SUBCASE("config validation runs first") {
    auto c = two_node(2);
    c.failures.push_back({0, 1, 5});  // notify delay beyond tau'
    CHECK_THROWS_AS(run(c), std::invalid_argument);
  }
}

TEST_CASE("reroute builds the shortest surviving suffix") {
  SUBCASE("gadget branch goes through the shared link") {
    auto g = build_rerouting_gadget({1, 10, 10, 1});
    const auto& net = g.config.network;
    Packet p;
    p.path = edges_of(net, {"e1>e1'", "e1'>f1"});
    p.original_path = p.path;
    p.next = 1;
    std::vector<bool> blocked(net.edge_count(), false);
    blocked[*net.find_edge("e1'>f1")] = true;
    auto r = reroute(net, p, blocked, 5);
    CHECK(r.rerouted);
    CHECK(r.path == edges_of(net, {"e1>e1'", "e1'>h", "h>h'", "h'>f1"}));
    CHECK(r.original_path == p.path);
  }
  SUBCASE("a parallel edge gives a one-edge suffix") {
    Network net;
    net.add_node("a");
    net.add_node("b");
    net.add_edge("x", "a", "b");
    net.add_edge("y", "a", "b");
    Packet p;
    p.path = Path{0};
    std::vector<bool> blocked{true, false};
    CHECK(reroute(net, p, blocked, 1).path == Path{1});
  }
  SUBCASE("absorbed packets cannot be re-routed") {
    auto net = testing::line_network(1);
    Packet p;
    p.path = Path{0};
    p.next = 1;
    CHECK_THROWS_AS(reroute(net, p, std::vector<bool>{false}, 1), ContractError);
  }
}

TEST_CASE("packets wait for the notification before re-routing") {
  auto c = detour(8);
  c.injections.push_back({1, Path{0}, 0});
  c.stalls.push_back({0, {1}});
  c.failures.push_back({0, 2, 2});  // known in round 4
  auto trace = run(c);
  auto rr = events_of<RerouteEvent>(trace);
  REQUIRE(rr.size() == 1);
  CHECK(rr[0].first == 4);
  CHECK(rr[0].second.failed_at == 2);
  CHECK(rr[0].second.old_suffix == Path{0});
  CHECK(rr[0].second.new_suffix == edges_of(c.network, {"uw", "wv"}));
  CHECK(events_of<FailNotifiedEvent>(trace)[0].first == 4);
  // Crosses uw in round 5 and wv in round 6.
  CHECK(events_of<AbsorptionEvent>(trace)[0].first == 6);
  // Nothing crossed the failed edge.
  for (const auto& [round, tx] : events_of<TransmissionEvent>(trace)) CHECK(tx.edge != 0);
}

TEST_CASE("a second failure re-routes an already re-routed packet") {
  ScenarioConfig c;
  for (auto n : {"s", "a", "b", "t"}) c.network.add_node(n);
  c.network.add_edge("st", "s", "t");
  c.network.add_edge("sa", "s", "a");
  c.network.add_edge("at", "a", "t");
  c.network.add_edge("ab", "a", "b");
  c.network.add_edge("bt", "b", "t");
  c.adversary = AdversaryType{Rational(1), 2, 1};
  c.horizon = 10;
  c.injections.push_back({1, edges_of(c.network, {"st"}), 0});
  c.stalls.push_back({0, {1}});
  c.failures.push_back({0, 2, 0});                            // st fails: go s>a>t
  c.failures.push_back({*c.network.find_edge("at"), 3, 0});  // at fails: go a>b>t
  auto trace = run(c);
  auto rr = events_of<RerouteEvent>(trace);
  REQUIRE(rr.size() == 2);
  CHECK(rr[0].second.new_suffix == edges_of(c.network, {"sa", "at"}));
  CHECK(rr[1].second.new_suffix == edges_of(c.network, {"ab", "bt"}));
  for (const auto& [round, r] : rr) CHECK(validate_path(c.network, r.new_suffix).valid());
  CHECK(audit_trace(trace).holds());
}

TEST_CASE("re-routed packets compete on equal terms") {
  // FIFO at uw: the fresh packet waiting there since round 2 goes before the
  // packet diverted in round 3, although the diverted one has the smaller id.
  auto c = detour(8);
  c.injections.push_back({1, Path{0}, 0});
  c.injections.push_back({2, edges_of(c.network, {"uw", "wv"}), 0});
  c.stalls.push_back({0, {1, 2}});
  c.stalls.push_back({1, {2, 3}});
  c.failures.push_back({0, 3, 0});
  auto trace = run(c);
  std::vector<PacketId> order;
  for (const auto& [round, tx] : events_of<TransmissionEvent>(trace)) {
    if (tx.edge == 1) order.push_back(tx.packet);
  }
  CHECK(order == std::vector<PacketId>{1, 0});
}

TEST_CASE("promote-after-tau turns a stall run into a failure") {
  auto c = detour(8);
  c.promote_after_tau = true;
  c.injections.push_back({1, Path{0}, 0});
  c.stalls.push_back({0, {1, 2}});
  auto trace = run(c);
  auto fails = events_of<FailureEvent>(trace);
  REQUIRE(fails.size() == 1);
  CHECK(fails[0].first == 3);
  CHECK(fails[0].second.promoted);
  CHECK(events_of<RerouteEvent>(trace)[0].first == 3);
  CHECK(events_of<AbsorptionEvent>(trace)[0].first == 5);

  c.promote_after_tau = false;
  auto plain = run(c);
  CHECK(events_of<FailureEvent>(plain).empty());
  CHECK(events_of<AbsorptionEvent>(plain)[0].first == 3);
}

TEST_CASE("validate_recovery examples") {
  auto c = detour(12);
  c.injections.push_back({1, Path{0}, 0});
  c.injections.push_back({2, Path{0}, 0});
  c.stalls.push_back({0, {1, 2}});
  c.failures.push_back({0, 3, 0});
  auto base = run(c);
  CHECK(validate_recovery(base).valid);  // no recoveries
  auto absorbed = events_of<AbsorptionEvent>(base);
  REQUIRE(absorbed.size() == 2);
  const Round last = absorbed.back().first;

  auto with_recovery = [&](Round when) {
    auto r = c;
    r.recoveries.push_back({0, when});
    return validate_recovery(run(r));
  };
  auto early = with_recovery(last - 1);
  CHECK_FALSE(early.valid);
  // The other diverted packet is absorbed in that same round, so both count.
  REQUIRE(early.violations.size() == 2);
  CHECK(early.violations[1].packet == absorbed.back().second.packet);
  CHECK(early.violations[1].absorbed_at == last);
  CHECK(early.violations[0].absorbed_at == last - 1);
  CHECK_FALSE(with_recovery(last).valid);
  CHECK(with_recovery(last + 1).valid);
}

TEST_CASE("engine state invariants hold round by round") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Engine engine(random_config(seed, static_cast<std::int64_t>(seed % 4)));
    std::int64_t injected = 0;
    while (!engine.done()) {
      auto report = engine.step();
      injected += report.injected;
      const auto& net = engine.config().network;
      std::int64_t queued = 0;
      for (EdgeId e = 0; e < net.edge_count(); ++e) {
        auto ids = engine.queue_in_arrival_order(e);
        queued += static_cast<std::int64_t>(ids.size());
        for (PacketId id : ids) {
          CHECK(engine.packet(id).next_edge() == e);
          CHECK_FALSE(engine.packet(id).absorbed());
        }
        CHECK(engine.buckets().level(e) <= Rational(engine.config().adversary.burstiness));
      }
      CHECK(queued == engine.queued_count());
      CHECK(injected == engine.absorbed_count() + queued);
      CHECK(report.total == queued);
    }
  }
}

TEST_CASE("traces pass the structural audit") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto trace = run(random_config(seed, static_cast<std::int64_t>(seed % 4)));
    auto audit = audit_trace(trace);
    CHECK_MESSAGE(audit.holds(), "seed " << seed << ": " << (audit.problems.empty() ? "" : audit.problems[0]));
  }
}

TEST_CASE("replaying a trace's schedules reproduces it exactly") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto trace = run(random_config(seed, static_cast<std::int64_t>(seed % 3)));
    auto again = run(trace.config);
    CHECK(again.digest == trace.digest);
    CHECK(again.rounds == trace.rounds);
    auto replay = run(replay_config(trace));
    CHECK(replay.digest == trace.digest);
    CHECK(replay.rounds == trace.rounds);
  }
}

TEST_CASE("digest covers events even when they are not stored") {
  auto c = random_config(9);
  auto full = run(c);
  auto lean = run(c, EngineOptions{false, false});
  CHECK(lean.digest == full.digest);
  CHECK(lean.rounds.size() == full.rounds.size());
  CHECK(lean.rounds.back().events.empty());
  CHECK(lean.rounds.back().total == full.rounds.back().total);
}

TEST_CASE("no-stall, no-failure executions are regular leaky-bucket traces") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto c = random_config(seed);
    c.stall_generator.reset();
    auto trace = run(c);
    CHECK(events_of<StallEvent>(trace).empty());
    CHECK(check_trace_regular(trace).holds);
  }
}

TEST_CASE("step past the horizon is a contract error") {
  Engine engine(two_node(1));
  engine.step();
  CHECK(engine.done());
  CHECK_THROWS_AS(engine.step(), ContractError);
}
