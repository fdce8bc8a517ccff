#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dfsim {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using PacketId = std::int64_t;
using Round = std::int64_t;

/// Sequence of edges a packet must cross, by edge index.
using Path = std::vector<EdgeId>;

struct Edge {
  std::string id;
  NodeId tail = 0;
  NodeId head = 0;
  /// Static link slowness, consulted only by SPL-NFS.
  std::int64_t slowness = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Directed multigraph with named nodes and edges. Names are unique within
/// their kind; indices are assigned in insertion order.
class Network {
 public:
  NodeId add_node(std::string name);
  /// Throws std::invalid_argument on a duplicate id, unknown endpoint or
  /// non-positive slowness.
  EdgeId add_edge(std::string id, std::string_view tail, std::string_view head, std::int64_t slowness = 1);

  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
  [[nodiscard]] const std::string& node_name(NodeId n) const { return nodes_.at(n); }
  [[nodiscard]] const Edge& edge(EdgeId e) const { return edges_.at(e); }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<std::string>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<EdgeId>& out_edges(NodeId n) const { return out_.at(n); }

  [[nodiscard]] std::optional<NodeId> find_node(std::string_view name) const;
  [[nodiscard]] std::optional<EdgeId> find_edge(std::string_view id) const;

  friend bool operator==(const Network& a, const Network& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::unordered_map<std::string, EdgeId> edge_index_;
};

enum class PathFault {
  kNone,
  kEmpty,
  kUnknownEdge,    // index out of range / name not in the network
  kDiscontinuous,  // head of edge i-1 differs from tail of edge i
  kRepeatedEdge,
};

struct PathCheck {
  PathFault fault = PathFault::kNone;
  /// Position of the first offending edge.
  std::size_t index = 0;

  [[nodiscard]] bool valid() const { return fault == PathFault::kNone; }
  [[nodiscard]] std::string describe() const;
};

PathCheck validate_path(const Network& net, std::span<const EdgeId> path);

/// Resolves edge names; an unknown name yields kUnknownEdge at its position.
PathCheck resolve_path(const Network& net, std::span<const std::string> names, Path& out);

/// Fewest-edge path from `from` to `to` that avoids every edge flagged in
/// `blocked`. Among equally short paths the one whose edge-id sequence is
/// lexicographically smallest wins. Returns an empty path when from == to and
/// nullopt when `to` is unreachable.
std::optional<Path> shortest_path(const Network& net, NodeId from, NodeId to, const std::vector<bool>& blocked);

/// True when every node reaches every other node using unblocked edges.
bool strongly_connected(const Network& net, const std::vector<bool>& blocked);

enum class Priority : std::uint8_t { kLow = 0, kHigh = 1 };

struct Packet {
  PacketId id = 0;
  Round injected_at = 0;
  Path path;
  std::size_t next = 0;
  std::uint8_t priority = 0;
  bool rerouted = false;
  /// Route as injected; differs from `path` only after a re-route.
  Path original_path;

  [[nodiscard]] bool absorbed() const { return next >= path.size(); }
  [[nodiscard]] EdgeId next_edge() const { return path.at(next); }
  [[nodiscard]] std::size_t remaining() const { return path.size() - next; }
};

/// Returns `pkt` moved one edge along its path. Throws ContractError when the
/// packet is already absorbed.
Packet advance(Packet pkt);

/// Node the packet currently sits at (tail of its next edge, or the
/// destination once absorbed).
NodeId current_node(const Network& net, const Packet& pkt);

std::string path_to_string(const Network& net, std::span<const EdgeId> path);

}  // namespace dfsim
