#include "occam/topology.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace occam {

Edge make_edge(const NodeId& a, const NodeId& b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

void Graph::add_edge(const NodeId& a, const NodeId& b) {
  if (a == b) throw std::invalid_argument("self-loop on node " + a);
  nodes_.insert(a);
  nodes_.insert(b);
  edges_.insert(make_edge(a, b));
}

bool Graph::has_edge(const NodeId& a, const NodeId& b) const {
  return edges_.count(make_edge(a, b)) != 0;
}

std::vector<NodeId> Graph::neighbors(const NodeId& n) const {
  std::vector<NodeId> out;
  for (const auto& [a, b] : edges_) {
    if (a == n) out.push_back(b);
    if (b == n) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<NodeId, std::vector<NodeId>> Graph::adjacency() const {
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const auto& n : nodes_) adj[n];
  for (const auto& [a, b] : edges_) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& [n, list] : adj) std::sort(list.begin(), list.end());
  return adj;
}

bool Network::is_host(const NodeId& n) const {
  return std::binary_search(hosts.begin(), hosts.end(), n);
}

const Path& Network::path(const NodeId& s, const NodeId& t) const {
  auto it = paths.find({s, t});
  if (it == paths.end()) throw std::out_of_range("no path " + s + " -> " + t);
  return it->second;
}

std::vector<std::string> check_network(const Network& net) {
  std::vector<std::string> issues;
  for (const auto& h : net.hosts)
    if (!net.graph.has_node(h)) issues.push_back("host " + h + " not in graph");
  for (const auto& [key, p] : net.paths) {
    const auto& [s, t] = key;
    std::string tag = "path " + s + "->" + t;
    if (p.empty() || p.front() != s || p.back() != t) {
      issues.push_back(tag + " has wrong endpoints");
      continue;
    }
    std::set<NodeId> seen;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!seen.insert(p[k]).second) issues.push_back(tag + " repeats node " + p[k]);
      if (k > 0 && !net.graph.has_edge(p[k - 1], p[k]))
        issues.push_back(tag + " uses missing edge " + p[k - 1] + "-" + p[k]);
    }
  }
  // Source tree: per source every node has a single predecessor.
  std::map<std::pair<NodeId, NodeId>, NodeId> pred;
  // Source oblivious: per destination every node has a single successor.
  std::map<std::pair<NodeId, NodeId>, NodeId> succ;
  for (const auto& [key, p] : net.paths) {
    const auto& [s, t] = key;
    for (std::size_t k = 1; k < p.size(); ++k) {
      auto [it, fresh] = pred.emplace(std::pair{s, p[k]}, p[k - 1]);
      if (!fresh && it->second != p[k - 1])
        issues.push_back("source " + s + ": node " + p[k] + " has two predecessors");
      auto [it2, fresh2] = succ.emplace(std::pair{t, p[k - 1]}, p[k]);
      if (!fresh2 && it2->second != p[k])
        issues.push_back("destination " + t + ": node " + p[k - 1] + " has two successors");
    }
  }
  return issues;
}

namespace {

std::vector<std::string> tokenize_line(std::string_view line) {
  auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string> tokens;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++lineno;
    fn(lineno, line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

}  // namespace

Graph parse_topology(std::string_view text) {
  Graph g;
  for_each_line(text, [&](int lineno, std::string_view line) {
    auto tok = tokenize_line(line);
    if (tok.empty()) return;
    if (tok.size() == 1) throw ParseError(lineno, "dangling endpoint '" + tok[0] + "'");
    if (tok.size() != 2) throw ParseError(lineno, "expected '<node> <node>'");
    if (tok[0] == tok[1]) throw ParseError(lineno, "self-loop on node " + tok[0]);
    g.add_edge(tok[0], tok[1]);
  });
  return g;
}

std::string format_topology(const Graph& g) {
  std::ostringstream out;
  for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
  return out.str();
}

std::vector<NodeId> parse_hosts(std::string_view text) {
  std::vector<NodeId> hosts;
  for_each_line(text, [&](int lineno, std::string_view line) {
    auto tok = tokenize_line(line);
    if (tok.empty()) return;
    if (tok.size() != 1) throw ParseError(lineno, "expected one host id per line");
    hosts.push_back(tok[0]);
  });
  std::sort(hosts.begin(), hosts.end());
  hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());
  return hosts;
}

namespace {

// Lexicographically smallest shortest paths from `src` to every node. Nodes
// are settled layer by layer; a node's rank inside its layer orders the
// paths that reach it, so the best predecessor is the one with lowest rank.
std::map<NodeId, NodeId> lexmin_parents(const std::map<NodeId, std::vector<NodeId>>& adj,
                                        const NodeId& src) {
  std::map<NodeId, NodeId> parent;
  std::map<NodeId, int> rank;
  std::vector<NodeId> layer{src};
  rank[src] = 0;
  std::set<NodeId> settled{src};
  while (!layer.empty()) {
    std::map<NodeId, std::pair<int, NodeId>> best;  // node -> (parent rank, parent)
    for (const auto& u : layer) {
      for (const auto& v : adj.at(u)) {
        if (settled.count(v)) continue;
        auto cand = std::pair{rank[u], u};
        auto it = best.find(v);
        if (it == best.end() || cand < it->second) best[v] = cand;
      }
    }
    std::vector<std::pair<std::pair<int, NodeId>, NodeId>> next;
    for (const auto& [v, pr] : best) next.push_back({{pr.first, v}, v});
    std::sort(next.begin(), next.end());
    layer.clear();
    for (std::size_t k = 0; k < next.size(); ++k) {
      const auto& v = next[k].second;
      parent[v] = best[v].second;
      rank[v] = static_cast<int>(k);
      settled.insert(v);
      layer.push_back(v);
    }
  }
  return parent;
}

}  // namespace

Network compute_routes(const Graph& g, std::vector<NodeId> hosts) {
  std::sort(hosts.begin(), hosts.end());
  hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());
  for (const auto& h : hosts)
    if (!g.has_node(h)) throw std::invalid_argument("host " + h + " not in graph");
  auto adj = g.adjacency();
  std::map<HostPair, Path> paths;
  for (const auto& s : hosts) {
    auto parent = lexmin_parents(adj, s);
    for (const auto& t : hosts) {
      if (t == s) continue;
      if (!parent.count(t)) throw std::invalid_argument("hosts " + s + " and " + t + " are disconnected");
      Path p{t};
      while (p.back() != s) p.push_back(parent.at(p.back()));
      std::reverse(p.begin(), p.end());
      paths[{s, t}] = std::move(p);
    }
  }
  return network_from_paths(std::move(hosts), std::move(paths));
}

Network network_from_paths(std::vector<NodeId> hosts, std::map<HostPair, Path> paths) {
  Network net;
  std::sort(hosts.begin(), hosts.end());
  hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());
  for (const auto& h : hosts) net.graph.add_node(h);
  for (const auto& [key, p] : paths)
    for (std::size_t k = 1; k < p.size(); ++k) net.graph.add_edge(p[k - 1], p[k]);
  net.hosts = std::move(hosts);
  net.paths = std::move(paths);
  return net;
}

// ---------------------------------------------------------------------------

std::vector<int> SourceTree::outgoing(int branch) const {
  std::vector<int> out;
  for (const auto& s : segments)
    if (s.from && *s.from == branch) out.push_back(s.id);
  return out;
}

std::vector<int> SourceTree::root_segments() const {
  std::vector<int> out;
  for (const auto& s : segments)
    if (!s.from) out.push_back(s.id);
  return out;
}

int SourceTree::incoming(int branch) const {
  for (const auto& s : segments)
    if (!s.to.is_host && s.to.branch == branch) return s.id;
  return -1;
}

std::string SourceTree::canonical() const {
  std::function<std::string(const SegmentEnd&)> render = [&](const SegmentEnd& end) -> std::string {
    if (end.is_host) return end.host;
    std::vector<std::string> kids;
    for (int sid : outgoing(end.branch)) kids.push_back(render(segments[sid].to));
    std::sort(kids.begin(), kids.end());
    std::string out = "(";
    for (std::size_t k = 0; k < kids.size(); ++k) out += (k ? "," : "") + kids[k];
    return out + ")";
  };
  std::vector<std::string> kids;
  for (int sid : root_segments()) kids.push_back(render(segments[sid].to));
  std::sort(kids.begin(), kids.end());
  std::string out = root + ":[";
  for (std::size_t k = 0; k < kids.size(); ++k) out += (k ? "," : "") + kids[k];
  return out + "]";
}

bool isomorphic(const SourceTree& a, const SourceTree& b) { return a.canonical() == b.canonical(); }

std::vector<std::string> check_source_tree(const SourceTree& t) {
  std::vector<std::string> issues;
  for (std::size_t k = 0; k < t.segments.size(); ++k)
    if (t.segments[k].id != static_cast<int>(k)) issues.push_back("segment ids are not dense");
  std::vector<int> in_count(t.num_branch_points, 0);
  std::set<NodeId> host_ends;
  for (const auto& s : t.segments) {
    if (s.to.is_host) {
      if (!host_ends.insert(s.to.host).second) issues.push_back("host " + s.to.host + " ends two segments");
    } else if (s.to.branch < 0 || s.to.branch >= t.num_branch_points) {
      issues.push_back("segment " + std::to_string(s.id) + " ends at unknown branch point");
    } else {
      ++in_count[s.to.branch];
    }
  }
  for (int b = 0; b < t.num_branch_points; ++b) {
    if (in_count[b] != 1) issues.push_back("branch point " + std::to_string(b) + " lacks a unique incoming segment");
    if (t.outgoing(b).size() < 2) issues.push_back("branch point " + std::to_string(b) + " has fewer than 2 outgoing segments");
  }
  if (host_ends != t.leaves) issues.push_back("leaf set does not match host terminals");
  return issues;
}

SourceTree source_tree_of(const Network& net, const NodeId& root) {
  if (!net.is_host(root)) throw std::invalid_argument(root + " is not a host");
  std::map<NodeId, std::set<NodeId>> children;
  for (const auto& t : net.hosts) {
    if (t == root) continue;
    const auto& p = net.path(root, t);
    for (std::size_t k = 1; k < p.size(); ++k) {
      if (k + 1 < p.size() && net.is_host(p[k]))
        throw std::invalid_argument("host " + p[k] + " is a transit node on " + root + "->" + t);
      children[p[k - 1]].insert(p[k]);
    }
  }
  SourceTree tree;
  tree.root = root;
  // Walk each child chain until a host or a node with >= 2 children.
  std::function<void(std::optional<int>, const NodeId&)> grow = [&](std::optional<int> from, const NodeId& first) {
    NodeId cur = first;
    while (!net.is_host(cur) && children[cur].size() == 1) cur = *children[cur].begin();
    Segment seg;
    seg.id = static_cast<int>(tree.segments.size());
    seg.from = from;
    if (net.is_host(cur)) {
      seg.to = SegmentEnd{true, -1, cur};
      tree.leaves.insert(cur);
      tree.segments.push_back(seg);
      return;
    }
    int b = tree.num_branch_points++;
    seg.to = SegmentEnd{false, b, {}};
    tree.segments.push_back(seg);
    for (const auto& c : children[cur]) grow(b, c);
  };
  for (const auto& c : children[root]) grow(std::nullopt, c);
  return tree;
}

// ---------------------------------------------------------------------------

namespace {

std::string quote(const NodeId& n) {
  std::string out = "\"";
  for (char c : n) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string export_dot(const Network& net) {
  std::ostringstream out;
  out << "graph network {\n";
  out << "  node [shape=circle];\n";
  for (const auto& n : net.graph.nodes()) {
    if (net.is_host(n))
      out << "  " << quote(n) << " [shape=box, style=filled, fillcolor=lightblue];\n";
    else
      out << "  " << quote(n) << ";\n";
  }
  for (const auto& [a, b] : net.graph.edges()) out << "  " << quote(a) << " -- " << quote(b) << ";\n";
  for (const auto& [key, p] : net.paths) {
    out << "  // path";
    for (const auto& n : p) out << ' ' << quote(n);
    out << '\n';
  }
  out << "}\n";
  return out.str();
}

namespace {

// Reads quoted or bare DOT identifiers from a statement.
std::vector<std::string> dot_ids(std::string_view s) {
  std::vector<std::string> ids;
  std::size_t k = 0;
  while (k < s.size()) {
    char c = s[k];
    if (c == '"') {
      std::string id;
      ++k;
      while (k < s.size() && s[k] != '"') {
        if (s[k] == '\\' && k + 1 < s.size()) ++k;
        id += s[k++];
      }
      ++k;
      ids.push_back(id);
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      std::string id;
      while (k < s.size() && (std::isalnum(static_cast<unsigned char>(s[k])) || s[k] == '_' || s[k] == '.')) id += s[k++];
      ids.push_back(id);
    } else {
      ++k;
    }
  }
  return ids;
}

}  // namespace

Network parse_dot(std::string_view text) {
  Network net;
  std::map<HostPair, Path> paths;
  bool in_body = false;
  for_each_line(text, [&](int lineno, std::string_view raw) {
    std::string line(raw);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) return;
    line = line.substr(first);
    if (!in_body) {
      if (line.find('{') == std::string::npos) throw ParseError(lineno, "expected graph header");
      in_body = true;
      return;
    }
    if (line.rfind("// path", 0) == 0) {
      auto ids = dot_ids(std::string_view(line).substr(7));
      if (ids.size() < 2) throw ParseError(lineno, "path comment needs two or more nodes");
      paths[{ids.front(), ids.back()}] = ids;
      return;
    }
    if (line[0] == '}' || line.rfind("//", 0) == 0 || line.rfind("node ", 0) == 0 || line.rfind("node[", 0) == 0) return;
    auto bracket = line.find('[');
    std::string head = line.substr(0, bracket);
    std::string attrs = bracket == std::string::npos ? "" : line.substr(bracket);
    auto dash = head.find("--");
    if (dash != std::string::npos) {
      auto a = dot_ids(std::string_view(head).substr(0, dash));
      auto b = dot_ids(std::string_view(head).substr(dash + 2));
      if (a.size() != 1 || b.size() != 1) throw ParseError(lineno, "malformed edge statement");
      if (a[0] == b[0]) throw ParseError(lineno, "self-loop on node " + a[0]);
      net.graph.add_edge(a[0], b[0]);
      return;
    }
    auto ids = dot_ids(head);
    if (ids.size() != 1) throw ParseError(lineno, "malformed node statement");
    net.graph.add_node(ids[0]);
    if (attrs.find("shape=box") != std::string::npos) net.hosts.push_back(ids[0]);
  });
  std::sort(net.hosts.begin(), net.hosts.end());
  net.paths = std::move(paths);
  return net;
}

// ---------------------------------------------------------------------------

Graph random_tree(int num_hosts, int max_nodes, std::mt19937_64& rng) {
  if (num_hosts < 2) throw std::invalid_argument("random_tree needs at least 2 hosts");
  if (max_nodes < num_hosts) throw std::invalid_argument("max_nodes below host count");
  Graph g;
  auto host = [](int k) { return "H" + std::to_string(k); };
  auto router = [](int k) { return "R" + std::to_string(k); };
  if (num_hosts == 2) {
    g.add_edge(host(0), host(1));
    return g;
  }
  if (max_nodes < num_hosts + 1) throw std::invalid_argument("max_nodes too small for a tree with a router");
  int routers = 1;
  for (int k = 0; k < 3; ++k) g.add_edge(router(0), host(k));
  for (int h = 3; h < num_hosts; ++h) {
    bool can_split = static_cast<int>(g.num_nodes()) + 2 <= max_nodes - (num_hosts - h - 1);
    std::bernoulli_distribution split(0.5);
    if (can_split && split(rng)) {
      std::vector<Edge> edges(g.edges().begin(), g.edges().end());
      std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
      auto [a, b] = edges[pick(rng)];
      Graph next;
      for (const auto& e : g.edges())
        if (e != Edge{a, b}) next.add_edge(e.first, e.second);
      auto r = router(routers++);
      next.add_edge(a, r);
      next.add_edge(r, b);
      next.add_edge(r, host(h));
      g = std::move(next);
    } else {
      std::uniform_int_distribution<int> pick(0, routers - 1);
      g.add_edge(router(pick(rng)), host(h));
    }
  }
  return g;
}

Graph random_connected_graph(int n, int extra_edges, std::mt19937_64& rng) {
  Graph g;
  auto router = [](int k) { return "R" + std::to_string(k); };
  g.add_node(router(0));
  for (int k = 1; k < n; ++k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    g.add_edge(router(k), router(pick(rng)));
  }
  int max_edges = n * (n - 1) / 2;
  for (int e = 0; e < extra_edges && static_cast<int>(g.num_edges()) < max_edges;) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    int a = pick(rng), b = pick(rng);
    if (a == b || g.has_edge(router(a), router(b))) continue;
    g.add_edge(router(a), router(b));
    ++e;
  }
  return g;
}

std::vector<NodeId> attach_hosts(Graph& g, int count, std::mt19937_64& rng) {
  std::vector<NodeId> nodes(g.nodes().begin(), g.nodes().end());
  if (nodes.empty()) throw std::invalid_argument("no attachment nodes");
  std::shuffle(nodes.begin(), nodes.end(), rng);
  std::uniform_int_distribution<std::size_t> any(0, nodes.size() - 1);
  std::vector<NodeId> hosts;
  for (int k = 0; k < count; ++k) {
    NodeId h = "H" + std::to_string(k);
    if (g.has_node(h)) throw std::invalid_argument("host name " + h + " already used");
    // distinct attachment points first, then reuse
    g.add_edge(k < static_cast<int>(nodes.size()) ? nodes[k] : nodes[any(rng)], h);
    hosts.push_back(h);
  }
  std::sort(hosts.begin(), hosts.end());
  return hosts;
}

}  // namespace occam
