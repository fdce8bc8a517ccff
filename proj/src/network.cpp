#include "dfsim/network.hpp"

#include <deque>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "dfsim/errors.hpp"

namespace dfsim {

NodeId Network::add_node(std::string name) {
  if (node_index_.count(name) != 0) throw std::invalid_argument("duplicate node '" + name + "'");
  auto id = static_cast<NodeId>(nodes_.size());
  node_index_.emplace(name, id);
  nodes_.push_back(std::move(name));
  out_.emplace_back();
  return id;
}

EdgeId Network::add_edge(std::string id, std::string_view tail, std::string_view head, std::int64_t slowness) {
  if (edge_index_.count(id) != 0) throw std::invalid_argument("duplicate edge '" + id + "'");
  auto t = find_node(tail);
  auto h = find_node(head);
  if (!t) throw std::invalid_argument("edge '" + id + "' has unknown tail '" + std::string(tail) + "'");
  if (!h) throw std::invalid_argument("edge '" + id + "' has unknown head '" + std::string(head) + "'");
  if (slowness < 1) throw std::invalid_argument("edge '" + id + "' needs positive slowness");
  auto e = static_cast<EdgeId>(edges_.size());
  edge_index_.emplace(id, e);
  edges_.push_back(Edge{std::move(id), *t, *h, slowness});
  out_[*t].push_back(e);
  return e;
}

std::optional<NodeId> Network::find_node(std::string_view name) const {
  auto it = node_index_.find(std::string(name));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeId> Network::find_edge(std::string_view id) const {
  auto it = edge_index_.find(std::string(id));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

std::string PathCheck::describe() const {
  std::string at = " at index " + std::to_string(index);
  switch (fault) {
    case PathFault::kNone: return "valid";
    case PathFault::kEmpty: return "empty path";
    case PathFault::kUnknownEdge: return "unknown edge" + at;
    case PathFault::kDiscontinuous: return "discontinuity" + at;
    case PathFault::kRepeatedEdge: return "repeated edge" + at;
  }
  return "invalid";
}

PathCheck validate_path(const Network& net, std::span<const EdgeId> path) {
  if (path.empty()) return {PathFault::kEmpty, 0};
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] >= net.edge_count()) return {PathFault::kUnknownEdge, i};
  }
  std::unordered_set<EdgeId> seen;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0 && net.edge(path[i - 1]).head != net.edge(path[i]).tail) return {PathFault::kDiscontinuous, i};
    if (!seen.insert(path[i]).second) return {PathFault::kRepeatedEdge, i};
  }
  return {};
}

PathCheck resolve_path(const Network& net, std::span<const std::string> names, Path& out) {
  out.clear();
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto e = net.find_edge(names[i]);
    if (!e) return {PathFault::kUnknownEdge, i};
    out.push_back(*e);
  }
  return validate_path(net, out);
}

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

// Hop distance from every node to `to`, over unblocked edges.
std::vector<std::size_t> distances_to(const Network& net, NodeId to, const std::vector<bool>& blocked) {
  std::vector<std::vector<EdgeId>> in(net.node_count());
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    if (!blocked.empty() && blocked[e]) continue;
    in[net.edge(e).head].push_back(e);
  }
  std::vector<std::size_t> dist(net.node_count(), kUnreached);
  std::deque<NodeId> frontier{to};
  dist[to] = 0;
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop_front();
    for (EdgeId e : in[v]) {
      NodeId u = net.edge(e).tail;
      if (dist[u] == kUnreached) {
        dist[u] = dist[v] + 1;
        frontier.push_back(u);
      }
    }
  }
  return dist;
}

}  // namespace

std::optional<Path> shortest_path(const Network& net, NodeId from, NodeId to, const std::vector<bool>& blocked) {
  auto dist = distances_to(net, to, blocked);
  if (dist[from] == kUnreached) return std::nullopt;
  Path path;
  NodeId cur = from;
  while (cur != to) {
    std::optional<EdgeId> best;
    for (EdgeId e : net.out_edges(cur)) {
      if (!blocked.empty() && blocked[e]) continue;
      if (dist[net.edge(e).head] + 1 != dist[cur]) continue;
      if (!best || net.edge(e).id < net.edge(*best).id) best = e;
    }
    path.push_back(*best);
    cur = net.edge(*best).head;
  }
  return path;
}

bool strongly_connected(const Network& net, const std::vector<bool>& blocked) {
  if (net.node_count() == 0) return true;
  auto reach = [&](bool forward) {
    std::vector<bool> seen(net.node_count(), false);
    std::vector<std::vector<NodeId>> adj(net.node_count());
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
      if (!blocked.empty() && blocked[e]) continue;
      const Edge& edge = net.edge(e);
      if (forward) {
        adj[edge.tail].push_back(edge.head);
      } else {
        adj[edge.head].push_back(edge.tail);
      }
    }
    std::vector<NodeId> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == net.node_count();
  };
  return reach(true) && reach(false);
}

Packet advance(Packet pkt) {
  if (pkt.absorbed()) throw ContractError("advance on absorbed packet " + std::to_string(pkt.id));
  ++pkt.next;
  return pkt;
}

NodeId current_node(const Network& net, const Packet& pkt) {
  if (pkt.absorbed()) return net.edge(pkt.path.back()).head;
  return net.edge(pkt.path[pkt.next]).tail;
}

std::string path_to_string(const Network& net, std::span<const EdgeId> path) {
  std::string out = "(";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out += ", ";
    out += net.edge(path[i]).id;
  }
  return out + ")";
}

}  // namespace dfsim
