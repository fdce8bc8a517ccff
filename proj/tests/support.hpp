#pragma once

#include <string>
#include <vector>

#include "dfsim/analysis.hpp"
#include "dfsim/engine.hpp"
#include "dfsim/scenario.hpp"

namespace dfsim::testing {

/// Line v0 -> v1 -> ... -> vn with edges e1..en (edge ei enters vi).
inline Network line_network(int edges) {
  Network net;
  for (int i = 0; i <= edges; ++i) net.add_node("v" + std::to_string(i));
  for (int i = 1; i <= edges; ++i) {
    net.add_edge("e" + std::to_string(i), "v" + std::to_string(i - 1), "v" + std::to_string(i));
  }
  return net;
}

/// Scripted scenario on a line, r = 1/2, b = 4, delta = 2, FIFO.
inline ScenarioConfig line_scenario(int edges, Round horizon) {
  ScenarioConfig c;
  c.name = "line";
  c.network = line_network(edges);
  c.adversary = AdversaryType{Rational(1, 2), 4, 2};
  c.horizon = horizon;
  return c;
}

inline Path edges_of(const Network& net, std::initializer_list<const char*> ids) {
  Path p;
  for (const char* id : ids) p.push_back(*net.find_edge(id));
  return p;
}

/// Random scenario whose adversary parameters and policy vary with the seed.
inline ScenarioConfig random_config(std::uint64_t seed, std::int64_t failures = 0, Round horizon = 300) {
  RandomScenarioParams p;
  p.seed = seed;
  p.rate = Rational(static_cast<std::int64_t>(1 + seed % 9), 10);
  p.burstiness = 1 + static_cast<std::int64_t>(seed % 3);
  p.delay = 1 + static_cast<std::int64_t>(seed % 4);
  p.tau = 1 + static_cast<std::int64_t>(seed % 3);
  p.horizon = horizon;
  p.failures = failures;
  p.policy = PolicyId{static_cast<BasePolicy>(seed % 8)};
  return gen_random_scenario(p);
}

template <class E>
std::vector<std::pair<Round, E>> events_of(const ExecutionTrace& trace) {
  std::vector<std::pair<Round, E>> out;
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) {
      if (const auto* e = std::get_if<E>(&ev)) out.emplace_back(rec.round, *e);
    }
  }
  return out;
}

}  // namespace dfsim::testing
