#include <algorithm>
#include <functional>
#include <random>

#include "doctest.h"
#include "dfsim/errors.hpp"
#include "dfsim/network.hpp"
#include "support.hpp"

using namespace dfsim;

namespace {

Network triangle() {
  Network net;
  net.add_node("a");
  net.add_node("b");
  net.add_node("c");
  net.add_node("d");
  net.add_edge("ab", "a", "b");
  net.add_edge("bc", "b", "c");
  net.add_edge("ca", "c", "a");
  net.add_edge("cd", "c", "d");
  return net;
}

// Every simple path from `from` to `to`, by depth-first enumeration.
void all_simple_paths(const Network& net, NodeId at, NodeId to, const std::vector<bool>& blocked,
                      std::vector<bool>& used_node, Path& current, std::vector<Path>& out) {
  if (at == to) {
    out.push_back(current);
    return;
  }
  for (EdgeId e : net.out_edges(at)) {
    if (blocked[e]) continue;
    NodeId next = net.edge(e).head;
    if (used_node[next]) continue;
    used_node[next] = true;
    current.push_back(e);
    all_simple_paths(net, next, to, blocked, used_node, current, out);
    current.pop_back();
    used_node[next] = false;
  }
}

std::vector<std::string> names(const Network& net, const Path& p) {
  std::vector<std::string> out;
  for (EdgeId e : p) out.push_back(net.edge(e).id);
  return out;
}

}  // namespace

TEST_CASE("network construction rejects bad edges") {
  Network net;
  net.add_node("a");
  net.add_node("b");
  CHECK_NOTHROW(net.add_edge("x", "a", "b"));
  CHECK_THROWS_AS(net.add_edge("x", "b", "a"), std::invalid_argument);   // duplicate id
  CHECK_THROWS_AS(net.add_edge("y", "a", "zz"), std::invalid_argument);  // unknown head
  // Parallel edges between the same pair are allowed.
  CHECK_NOTHROW(net.add_edge("x2", "a", "b"));
  CHECK(net.edge_count() == 2);
  CHECK(net.out_edges(*net.find_node("a")).size() == 2);
}

TEST_CASE("validate_path examples") {
  auto net = triangle();
  auto id = [&](const char* s) { return *net.find_edge(s); };

  SUBCASE("single edge is valid") { CHECK(validate_path(net, Path{id("ab")}).valid()); }
  SUBCASE("repeated edge reported at its second position") {
    auto check = validate_path(net, Path{id("ab"), id("bc"), id("ca"), id("ab")});
    CHECK(check.fault == PathFault::kRepeatedEdge);
    CHECK(check.index == 3);
  }
  SUBCASE("discontinuity reported at the edge that does not connect") {
    auto check = validate_path(net, Path{id("ab"), id("cd")});
    CHECK(check.fault == PathFault::kDiscontinuous);
    CHECK(check.index == 1);
  }
  SUBCASE("unknown edges are their own category") {
    auto check = validate_path(net, Path{id("ab"), 99});
    CHECK(check.fault == PathFault::kUnknownEdge);
    CHECK(check.index == 1);
    CHECK(validate_path(net, Path{}).fault == PathFault::kEmpty);
  }
  SUBCASE("node revisits are fine when edges are distinct") {
    CHECK(validate_path(net, Path{id("ab"), id("bc"), id("ca")}).valid());
  }
  SUBCASE("resolve_path maps names and flags unknown ones") {
    Path out;
    std::vector<std::string> good{"ab", "bc"};
    CHECK(resolve_path(net, good, out).valid());
    CHECK(out == Path{id("ab"), id("bc")});
    std::vector<std::string> bad{"ab", "nope"};
    auto check = resolve_path(net, bad, out);
    CHECK(check.fault == PathFault::kUnknownEdge);
    CHECK(check.index == 1);
  }
}

TEST_CASE("advance walks the path and refuses to pass the end") {
  auto net = testing::line_network(2);
  Packet p;
  p.path = testing::edges_of(net, {"e1", "e2"});
  p = advance(p);
  CHECK(p.next == 1);
  CHECK_FALSE(p.absorbed());
  CHECK(current_node(net, p) == *net.find_node("v1"));
  p = advance(p);
  CHECK(p.next == 2);
  CHECK(p.absorbed());
  CHECK(current_node(net, p) == *net.find_node("v2"));
  CHECK_THROWS_AS(advance(p), ContractError);
}

TEST_CASE("shortest_path prefers fewer edges, then the smaller id sequence") {
  Network net;
  for (auto n : {"s", "x", "y", "t"}) net.add_node(n);
  net.add_edge("b1", "s", "x");
  net.add_edge("a1", "s", "y");
  net.add_edge("b2", "x", "t");
  net.add_edge("a2", "y", "t");
  net.add_edge("long1", "s", "t");  // direct
  std::vector<bool> none(net.edge_count(), false);
  auto s = *net.find_node("s");
  auto t = *net.find_node("t");
  CHECK(names(net, *shortest_path(net, s, t, none)) == std::vector<std::string>{"long1"});
  auto blocked = none;
  blocked[*net.find_edge("long1")] = true;
  CHECK(names(net, *shortest_path(net, s, t, blocked)) == std::vector<std::string>{"a1", "a2"});
  blocked[*net.find_edge("a2")] = true;
  CHECK(names(net, *shortest_path(net, s, t, blocked)) == std::vector<std::string>{"b1", "b2"});
  blocked[*net.find_edge("b1")] = true;
  CHECK_FALSE(shortest_path(net, s, t, blocked).has_value());
  CHECK(shortest_path(net, s, s, none)->empty());
}

TEST_CASE("shortest_path agrees with brute-force enumeration on random graphs") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    Network net;
    const int n = 3 + static_cast<int>(gen() % 5);
    for (int i = 0; i < n; ++i) net.add_node("n" + std::to_string(i));
    const int m = static_cast<int>(gen() % (2 * n)) + n;
    for (int i = 0; i < m; ++i) {
      int a = static_cast<int>(gen() % n);
      int b = static_cast<int>(gen() % n);
      if (a == b) continue;
      // Ids with shuffled digits so index order and name order disagree.
      net.add_edge("q" + std::to_string((i * 7919) % 1000), "n" + std::to_string(a), "n" + std::to_string(b));
    }
    std::vector<bool> blocked(net.edge_count(), false);
    for (std::size_t e = 0; e < blocked.size(); ++e) blocked[e] = gen() % 5 == 0;
    for (NodeId from = 0; from < net.node_count(); ++from) {
      for (NodeId to = 0; to < net.node_count(); ++to) {
        if (from == to) continue;
        std::vector<Path> paths;
        std::vector<bool> used(net.node_count(), false);
        used[from] = true;
        Path cur;
        all_simple_paths(net, from, to, blocked, used, cur, paths);
        auto got = shortest_path(net, from, to, blocked);
        if (paths.empty()) {
          CHECK_FALSE(got.has_value());
          continue;
        }
        auto best = *std::min_element(paths.begin(), paths.end(), [&](const Path& x, const Path& y) {
          if (x.size() != y.size()) return x.size() < y.size();
          return names(net, x) < names(net, y);
        });
        REQUIRE(got.has_value());
        CHECK(names(net, *got) == names(net, best));
      }
    }
  }
}

TEST_CASE("strong connectivity respects blocked edges") {
  auto net = triangle();
  std::vector<bool> none(net.edge_count(), false);
  CHECK_FALSE(strongly_connected(net, none));  // d is a sink
  Network ring;
  for (auto n : {"a", "b", "c"}) ring.add_node(n);
  ring.add_edge("ab", "a", "b");
  ring.add_edge("bc", "b", "c");
  ring.add_edge("ca", "c", "a");
  std::vector<bool> open(3, false);
  CHECK(strongly_connected(ring, open));
  open[1] = true;
  CHECK_FALSE(strongly_connected(ring, open));
}

TEST_CASE("path_to_string joins edge ids") {
  auto net = testing::line_network(3);
  CHECK(path_to_string(net, testing::edges_of(net, {"e1", "e2", "e3"})).find("e2") != std::string::npos);
}
