#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace occam {

using NodeId = std::string;
using Edge = std::pair<NodeId, NodeId>;  // stored with first < second
using HostPair = std::pair<NodeId, NodeId>;
using Path = std::vector<NodeId>;

/// Thrown by the text readers; carries the 1-based line of the offending input.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

Edge make_edge(const NodeId& a, const NodeId& b);

/// Undirected simple graph over string node ids.
class Graph {
 public:
  void add_node(const NodeId& n) { nodes_.insert(n); }
  /// Adds both endpoints. Self-loops throw std::invalid_argument.
  void add_edge(const NodeId& a, const NodeId& b);

  bool has_node(const NodeId& n) const { return nodes_.count(n) != 0; }
  bool has_edge(const NodeId& a, const NodeId& b) const;

  const std::set<NodeId>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  /// Sorted neighbour list.
  std::vector<NodeId> neighbors(const NodeId& n) const;
  std::map<NodeId, std::vector<NodeId>> adjacency() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::set<NodeId> nodes_;
  std::set<Edge> edges_;
};

/// N = (G, H, P): a graph, its hosts and one routing path per ordered host pair.
struct Network {
  Graph graph;
  std::vector<NodeId> hosts;  // sorted, unique
  std::map<HostPair, Path> paths;

  bool is_host(const NodeId& n) const;
  const Path& path(const NodeId& s, const NodeId& t) const;

  friend bool operator==(const Network&, const Network&) = default;
};

/// Returns a list of human-readable invariant violations (empty when valid):
/// hosts in graph, path endpoints, path edges, simple paths, source-tree and
/// source-oblivious properties.
std::vector<std::string> check_network(const Network& net);

/// Edge-list topology format: "<a> <b>" per line, '#' starts a comment.
Graph parse_topology(std::string_view text);
std::string format_topology(const Graph& g);
/// One node id per line, '#' comments.
std::vector<NodeId> parse_hosts(std::string_view text);

/// Shortest-hop routes for every ordered host pair. Ties are broken by the
/// lexicographically smallest node sequence, which keeps routes both
/// source-tree and source-oblivious. The returned graph is pruned to the
/// nodes and edges that carry at least one route.
Network compute_routes(const Graph& g, std::vector<NodeId> hosts);

/// Builds a Network from explicit paths; the graph is the union of the path
/// edges plus the hosts.
Network network_from_paths(std::vector<NodeId> hosts, std::map<HostPair, Path> paths);

// ---------------------------------------------------------------------------
// Logical source trees

struct SegmentEnd {
  bool is_host = false;
  int branch = -1;  // valid when !is_host
  NodeId host;      // valid when is_host

  friend bool operator==(const SegmentEnd&, const SegmentEnd&) = default;
};

struct Segment {
  int id = 0;
  std::optional<int> from;  // parent branch point; nullopt means the root
  SegmentEnd to;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Logical tree of path bifurcations from `root`. Segments collapse chains of
/// degree-2 nodes; branch points have at least two outgoing segments.
struct SourceTree {
  NodeId root;
  std::vector<Segment> segments;  // segments[k].id == k
  int num_branch_points = 0;
  std::set<NodeId> leaves;

  /// Outgoing segment ids of a branch point (O(b)).
  std::vector<int> outgoing(int branch) const;
  /// Segments starting at the root.
  std::vector<int> root_segments() const;
  /// Segment whose terminal is the given branch point.
  int incoming(int branch) const;
  /// Canonical string; equal iff the trees are isomorphic with leaves fixed.
  std::string canonical() const;
};

bool isomorphic(const SourceTree& a, const SourceTree& b);
/// Structural checks (rooted tree, >=2 outgoing per branch point, host leaves).
std::vector<std::string> check_source_tree(const SourceTree& t);

SourceTree source_tree_of(const Network& net, const NodeId& root);

/// Deterministic Graphviz rendering. Routing paths are emitted as
/// `// path` comments so `parse_dot` can recover the full network.
std::string export_dot(const Network& net);
Network parse_dot(std::string_view text);

// ---------------------------------------------------------------------------
// Instance generators used by the CLI and the test suites.

/// Random tree with `num_hosts` leaf hosts (named H0..), internal nodes named
/// R0.., every internal node of degree >= 3 and at most `max_nodes` nodes.
Graph random_tree(int num_hosts, int max_nodes, std::mt19937_64& rng);
/// Random connected graph over `n` nodes named R0.. with `extra_edges` chords.
Graph random_connected_graph(int n, int extra_edges, std::mt19937_64& rng);
/// Attaches `count` new leaf hosts H0.. to random nodes of `g`, distinct while
/// nodes last.
std::vector<NodeId> attach_hosts(Graph& g, int count, std::mt19937_64& rng);

}  // namespace occam
