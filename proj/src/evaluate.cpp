#include "occam/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <stdexcept>

namespace occam {

namespace {

class MappingSearch {
 public:
  MappingSearch(const Graph& g, const Graph& gi, const std::vector<NodeId>& hosts) {
    std::set<NodeId> hs(hosts.begin(), hosts.end());
    auto index = [&](const Graph& graph, std::vector<NodeId>& internal, std::map<NodeId, int>& id) {
      for (const auto& h : hosts) id[h] = static_cast<int>(id.size());
      for (const auto& n : graph.nodes())
        if (!hs.count(n)) {
          id[n] = static_cast<int>(id.size());
          internal.push_back(n);
        }
    };
    index(g, a_nodes_, gid_);
    index(gi, b_nodes_, iid_);
    nh_ = static_cast<int>(hosts.size());
    const int na = nh_ + static_cast<int>(a_nodes_.size()), nb = nh_ + static_cast<int>(b_nodes_.size());
    gadj_.assign(na, std::vector<char>(na, 0));
    iadj_.assign(nb, std::vector<char>(nb, 0));
    for (const auto& [x, y] : g.edges()) gadj_[gid_.at(x)][gid_.at(y)] = gadj_[gid_.at(y)][gid_.at(x)] = 1;
    for (const auto& [x, y] : gi.edges()) iadj_[iid_.at(x)][iid_.at(y)] = iadj_[iid_.at(y)][iid_.at(x)] = 1;
    e_ground_ = static_cast<int>(g.num_edges());
    e_inferred_ = static_cast<int>(gi.num_edges());
    phi_.assign(na, -1);
    for (int h = 0; h < nh_; ++h) phi_[h] = h;
    used_.assign(nb, 0);
    for (int h = 0; h < nh_; ++h) used_[h] = 1;
    // edges between hosts are matched under every mapping
    for (int x = 0; x < nh_; ++x)
      for (int y = x + 1; y < nh_; ++y)
        if (gadj_[x][y] && iadj_[x][y]) ++base_;
    // most connected ground nodes first
    for (int k = nh_; k < na; ++k) order_.push_back(k);
    std::stable_sort(order_.begin(), order_.end(), [&](int x, int y) { return degree(gadj_, x) > degree(gadj_, y); });
  }

  NsResult run() {
    NsResult res;
    const bool exact = static_cast<int>(a_nodes_.size()) <= kExactMappingLimit &&
                       static_cast<int>(b_nodes_.size()) <= kExactMappingLimit;
    best_ = -1;
    if (exact) dfs(0, base_);
    else greedy();
    res.certified = exact;
    res.matched = best_;
    res.union_size = e_ground_ + e_inferred_ - best_;
    res.ns = res.union_size == 0 ? 100.0 : 100.0 * best_ / res.union_size;
    for (std::size_t k = 0; k < best_phi_.size(); ++k) {
      if (best_phi_[k] < 0) continue;
      res.mapping.pairs[ground_name(static_cast<int>(k))] = inferred_name(best_phi_[k]);
    }
    return res;
  }

 private:
  static int degree(const std::vector<std::vector<char>>& adj, int x) {
    return static_cast<int>(std::count(adj[x].begin(), adj[x].end(), 1));
  }
  NodeId ground_name(int k) const {
    for (const auto& [n, id] : gid_)
      if (id == k) return n;
    return {};
  }
  NodeId inferred_name(int k) const {
    for (const auto& [n, id] : iid_)
      if (id == k) return n;
    return {};
  }

  /// Matched edges gained by mapping ground node a to inferred node b.
  int gain(int a, int b) const {
    int g = 0;
    for (int x = 0; x < static_cast<int>(gadj_.size()); ++x)
      if (gadj_[a][x] && phi_[x] >= 0 && x != a && iadj_[b][phi_[x]]) ++g;
    return g;
  }

  int open_ground_edges(std::size_t depth) const {
    std::vector<char> open(gadj_.size(), 0);
    for (std::size_t k = depth; k < order_.size(); ++k) open[order_[k]] = 1;
    int cnt = 0;
    for (std::size_t x = 0; x < gadj_.size(); ++x)
      for (std::size_t y = x + 1; y < gadj_.size(); ++y)
        if (gadj_[x][y] && (open[x] || open[y])) ++cnt;
    return cnt;
  }
  int open_inferred_edges() const {
    int cnt = 0;
    for (std::size_t x = 0; x < iadj_.size(); ++x)
      for (std::size_t y = x + 1; y < iadj_.size(); ++y)
        if (iadj_[x][y] && (!used_[x] || !used_[y])) ++cnt;
    return cnt;
  }

  void dfs(std::size_t depth, int matched) {
    if (depth == order_.size()) {
      if (matched > best_) {
        best_ = matched;
        best_phi_ = phi_;
      }
      return;
    }
    if (matched + std::min(open_ground_edges(depth), open_inferred_edges()) <= best_) return;
    const int a = order_[depth];
    for (int b = nh_; b < static_cast<int>(used_.size()); ++b) {
      if (used_[b]) continue;
      int g = gain(a, b);
      phi_[a] = b;
      used_[b] = 1;
      dfs(depth + 1, matched + g);
      used_[b] = 0;
      phi_[a] = -1;
    }
    dfs(depth + 1, matched);
  }

  int total() const {
    int m = base_;
    for (std::size_t x = nh_; x < gadj_.size(); ++x)
      for (std::size_t y = 0; y < gadj_.size(); ++y)
        if (gadj_[x][y] && (y < static_cast<std::size_t>(nh_) || y > x) && phi_[x] >= 0 && phi_[y] >= 0 &&
            iadj_[phi_[x]][phi_[y]])
          ++m;
    return m;
  }

  // Greedy seeding by neighbourhood overlap, then pairwise swaps until stable.
  void greedy() {
    for (int a : order_) {
      int best_b = -1, best_g = -1;
      for (int b = nh_; b < static_cast<int>(used_.size()); ++b)
        if (!used_[b] && gain(a, b) > best_g) best_g = gain(a, b), best_b = b;
      if (best_b >= 0) {
        phi_[a] = best_b;
        used_[best_b] = 1;
      }
    }
    int cur = total();
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t i = 0; i < order_.size(); ++i)
        for (std::size_t j = i + 1; j < order_.size(); ++j) {
          std::swap(phi_[order_[i]], phi_[order_[j]]);
          int t = total();
          if (t > cur) {
            cur = t;
            improved = true;
          } else {
            std::swap(phi_[order_[i]], phi_[order_[j]]);
          }
        }
    }
    best_ = cur;
    best_phi_ = phi_;
  }

  int nh_ = 0;
  std::vector<NodeId> a_nodes_, b_nodes_;
  std::map<NodeId, int> gid_, iid_;
  std::vector<std::vector<char>> gadj_, iadj_;
  int e_ground_ = 0, e_inferred_ = 0, base_ = 0;
  std::vector<int> phi_, best_phi_, order_;
  std::vector<char> used_;
  int best_ = -1;
};

}  // namespace

NsResult ns_score(const Graph& ground, const Graph& inferred, const std::vector<NodeId>& hosts) {
  for (const auto& h : hosts)
    if (!ground.has_node(h) || !inferred.has_node(h)) throw std::invalid_argument("host " + h + " missing from a graph");
  return MappingSearch(ground, inferred, hosts).run();
}

int levenshtein(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PedResult ped(const std::map<HostPair, Path>& ground, const std::map<HostPair, Path>& inferred,
              const NodeMapping& mapping) {
  PedResult out;
  for (const auto& [key, gp] : inferred)
    if (!ground.count(key)) throw std::invalid_argument("inferred path " + key.first + "->" + key.second + " has no ground counterpart");
  long total = 0;
  for (const auto& [key, gp] : ground) {
    auto it = inferred.find(key);
    if (it == inferred.end()) throw std::invalid_argument("no inferred path " + key.first + "->" + key.second);
    std::vector<NodeId> mapped;
    for (const auto& n : gp) {
      auto m = mapping.pairs.find(n);
      // "\x01" cannot occur in a node id, so an unmapped node never matches
      mapped.push_back(m == mapping.pairs.end() ? "\x01" + n : m->second);
    }
    int d = levenshtein(mapped, it->second);
    out.per_pair[key] = d;
    total += d;
  }
  out.mean = ground.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(ground.size());
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["ns"] = ns;
  j["matched"] = matched;
  j["union"] = union_size;
  j["ped"] = ped;
  j["certified"] = certified;
  j["mapping"] = nlohmann::json::object();
  for (const auto& [a, b] : mapping.pairs) j["mapping"][a] = b;
  j["per_path_ped"] = nlohmann::json::array();
  for (const auto& [k, v] : per_path_ped) j["per_path_ped"].push_back({{"src", k.first}, {"dst", k.second}, {"edits", v}});
  j["collapsed_pairs"] = nlohmann::json::array();
  for (const auto& [a, b] : collapsed_pairs) j["collapsed_pairs"].push_back({a, b});
  return j;
}

EvalReport evaluate(const Network& ground, const Network& inferred) {
  if (ground.hosts != inferred.hosts) throw std::invalid_argument("host sets differ");
  auto ns = ns_score(ground.graph, inferred.graph, ground.hosts);
  auto p = ped(ground.paths, inferred.paths, ns.mapping);
  EvalReport r;
  r.ns = ns.ns;
  r.matched = ns.matched;
  r.union_size = ns.union_size;
  r.mapping = ns.mapping;
  r.certified = ns.certified;
  r.per_path_ped = p.per_pair;
  r.ped = p.mean;
  return r;
}

Network contract(const Network& net, const NodeId& keep, const NodeId& drop) {
  if (!net.graph.has_edge(keep, drop)) throw std::invalid_argument("contracted nodes must be adjacent");
  if (net.is_host(keep) || net.is_host(drop)) throw std::invalid_argument("only internal nodes can be contracted");
  auto ren = [&](const NodeId& n) { return n == drop ? keep : n; };
  Network out;
  out.hosts = net.hosts;
  for (const auto& n : net.graph.nodes())
    if (n != drop) out.graph.add_node(n);
  for (const auto& [a, b] : net.graph.edges())
    if (ren(a) != ren(b)) out.graph.add_edge(ren(a), ren(b));
  for (const auto& [key, p] : net.paths) {
    Path q;
    for (const auto& n : p)
      if (q.empty() || q.back() != ren(n)) q.push_back(ren(n));
    out.paths[key] = std::move(q);
  }
  return out;
}

EvalReport collapse_search(const Network& ground, const Network& inferred, int max_pairs) {
  EvalReport best = evaluate(ground, inferred);
  std::set<std::string> seen;
  std::function<void(const Network&, std::vector<std::pair<NodeId, NodeId>>, int)> rec =
      [&](const Network& g, std::vector<std::pair<NodeId, NodeId>> done, int left) {
        if (left == 0) return;
        for (const auto& [a, b] : g.graph.edges()) {
          if (g.is_host(a) || g.is_host(b)) continue;
          Network c = contract(g, a, b);
          auto key = format_topology(c.graph);
          if (!seen.insert(key).second) continue;
          auto pairs = done;
          pairs.push_back({a, b});
          EvalReport r = evaluate(c, inferred);
          if (r.ns > best.ns + 1e-12 || (std::abs(r.ns - best.ns) <= 1e-12 && r.ped < best.ped - 1e-12)) {
            best = r;
            best.collapsed_pairs = pairs;
          }
          rec(c, pairs, left - 1);
        }
      };
  rec(ground, {}, max_pairs);
  return best;
}

std::string eval_csv_header() { return "label,ns,matched,union,ped,certified\n"; }

std::string eval_csv_row(const std::string& label, const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.6f,%d,%d,%.6f,%d\n", label.c_str(), r.ns, r.matched, r.union_size, r.ped,
                r.certified ? 1 : 0);
  return buf;
}

}  // namespace occam
