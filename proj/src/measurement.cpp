#include "occam/measurement.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace occam {

namespace {

std::pair<NodeId, NodeId> sorted_pair(NodeId a, NodeId b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::string pair_str(const std::pair<NodeId, NodeId>& p) { return "(" + p.first + "," + p.second + ")"; }

}  // namespace

std::size_t ConstraintSet::num_flipped() const {
  std::size_t n = 0;
  for (const auto& p : psms) n += p.flipped;
  for (const auto& d : dms) n += d.flipped;
  return n;
}

void ConstraintSet::canonicalize() {
  std::vector<PsmTriple> ps;
  for (auto p : psms) {
    p.lt[0] = sorted_pair(p.lt[0].first, p.lt[0].second);
    p.lt[1] = sorted_pair(p.lt[1].first, p.lt[1].second);
    if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(std::move(p));
  }
  psms = std::move(ps);
  std::vector<DmRecord> ds;
  for (auto& d : dms)
    if (std::find(ds.begin(), ds.end(), d) == ds.end()) ds.push_back(d);
  dms = std::move(ds);
}

std::vector<NodeId> ConstraintSet::hosts() const {
  std::set<NodeId> hs;
  for (const auto& p : psms) {
    hs.insert(p.source);
    for (const auto& side : p.lt) hs.insert({side.first, side.second});
  }
  for (const auto& d : dms)
    for (int k = 0; k < (d.kind == DmKind::Relative ? 2 : 1); ++k) hs.insert({d.lt[k].first, d.lt[k].second});
  return {hs.begin(), hs.end()};
}

PsmSampling parse_psm_sampling(std::string_view s) {
  if (s == "none") return PsmSampling::None;
  if (s == "canonical") return PsmSampling::Canonical;
  if (s == "all") return PsmSampling::AllPairs;
  throw std::invalid_argument("unknown PSM sampling '" + std::string(s) + "'");
}

DmMode parse_dm_mode(std::string_view s) {
  if (s == "none") return DmMode::None;
  if (s == "relative") return DmMode::Relative;
  if (s == "absolute") return DmMode::Absolute;
  throw std::invalid_argument("unknown DM mode '" + std::string(s) + "'");
}

int psm_value(const Network& net, const NodeId& source, const NodeId& t1, const NodeId& t2) {
  const auto& p1 = net.path(source, t1);
  const auto& p2 = net.path(source, t2);
  std::set<Edge> e1;
  for (std::size_t k = 1; k < p1.size(); ++k) e1.insert(make_edge(p1[k - 1], p1[k]));
  int shared = 0;
  for (std::size_t k = 1; k < p2.size(); ++k) shared += e1.count(make_edge(p2[k - 1], p2[k]));
  return shared;
}

int psm_node_value(const Network& net, const NodeId& source, const NodeId& t1, const NodeId& t2) {
  const auto& p1 = net.path(source, t1);
  const auto& p2 = net.path(source, t2);
  std::set<NodeId> n1(p1.begin(), p1.end());
  int shared = 0;
  for (const auto& n : p2) shared += n1.count(n);
  return shared;
}

int dm_value(const Network& net, const NodeId& source, const NodeId& dest) {
  return static_cast<int>(net.path(source, dest).size()) - 1;
}

ConstraintSet derive_constraints(const Network& net, PsmSampling psm, DmMode dm) {
  ConstraintSet cs;
  for (const auto& s : net.hosts) {
    std::vector<NodeId> dests;
    for (const auto& t : net.hosts)
      if (t != s) dests.push_back(t);
    auto emit_psm = [&](std::pair<NodeId, NodeId> a, std::pair<NodeId, NodeId> b) {
      int va = psm_value(net, s, a.first, a.second);
      int vb = psm_value(net, s, b.first, b.second);
      if (va == vb) return;
      if (va > vb) std::swap(a, b);
      cs.psms.push_back(PsmTriple{s, {a, b}, false});
    };
    const auto n = dests.size();
    if (psm == PsmSampling::Canonical) {
      for (std::size_t mid = 0; mid < n; ++mid)
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = a + 1; b < n; ++b) {
            if (a == mid || b == mid) continue;
            emit_psm(sorted_pair(dests[a], dests[mid]), sorted_pair(dests[mid], dests[b]));
          }
    } else if (psm == PsmSampling::AllPairs) {
      std::vector<std::pair<NodeId, NodeId>> pairs;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) pairs.push_back({dests[a], dests[b]});
      for (std::size_t x = 0; x < pairs.size(); ++x)
        for (std::size_t y = x + 1; y < pairs.size(); ++y) emit_psm(pairs[x], pairs[y]);
    }
    if (dm == DmMode::Relative) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
          HostPair pa{s, dests[a]}, pb{s, dests[b]};
          int da = dm_value(net, s, dests[a]), db = dm_value(net, s, dests[b]);
          if (da == db) continue;
          if (da > db) std::swap(pa, pb);
          DmRecord r;
          r.kind = DmKind::Relative;
          r.lt[0] = pa;
          r.lt[1] = pb;
          cs.dms.push_back(r);
        }
    } else if (dm == DmMode::Absolute) {
      for (const auto& t : dests) {
        DmRecord r;
        r.kind = DmKind::Absolute;
        r.lt[0] = {s, t};
        r.hops = dm_value(net, s, t);
        cs.dms.push_back(r);
      }
    }
  }
  cs.canonicalize();
  return cs;
}

ConstraintSet inject_errors(const ConstraintSet& cs, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("error probability must lie in [0,1]");
  ConstraintSet out = cs;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(p);
  for (auto& r : out.psms) {
    if (flip(rng)) {
      std::swap(r.lt[0], r.lt[1]);
      r.flipped = !r.flipped;
    }
  }
  for (auto& r : out.dms) {
    if (r.kind != DmKind::Relative) continue;
    if (flip(rng)) {
      std::swap(r.lt[0], r.lt[1]);
      r.flipped = !r.flipped;
    }
  }
  return out;
}

RecordCheck check_records(const Network& net, const ConstraintSet& cs) {
  RecordCheck rc;
  auto tally = [&](bool flipped) { (flipped ? rc.flipped_violations : rc.unflipped_violations)++; };
  for (const auto& r : cs.psms) {
    std::string desc = "PSM(" + r.source + ";" + pair_str(r.lt[0]) + ") < PSM(" + r.source + ";" +
                       pair_str(r.lt[1]) + ")" + (r.flipped ? " [flipped]" : "");
    int n0 = psm_node_value(net, r.source, r.lt[0].first, r.lt[0].second);
    int n1 = psm_node_value(net, r.source, r.lt[1].first, r.lt[1].second);
    if (!(n0 < n1)) {
      rc.psm_violations.push_back(desc);
      tally(r.flipped);
    }
    int l0 = psm_value(net, r.source, r.lt[0].first, r.lt[0].second);
    int l1 = psm_value(net, r.source, r.lt[1].first, r.lt[1].second);
    if (!(l0 < l1)) rc.psm_link_violations.push_back(desc);
  }
  for (const auto& r : cs.dms) {
    int d0 = dm_value(net, r.lt[0].first, r.lt[0].second);
    bool ok;
    std::string desc;
    if (r.kind == DmKind::Relative) {
      int d1 = dm_value(net, r.lt[1].first, r.lt[1].second);
      ok = d0 < d1;
      desc = "DM" + pair_str(r.lt[0]) + " < DM" + pair_str(r.lt[1]);
    } else {
      ok = d0 == r.hops;
      desc = "DM" + pair_str(r.lt[0]) + " = " + std::to_string(r.hops);
    }
    if (!ok) {
      rc.dm_violations.push_back(desc + (r.flipped ? " [flipped]" : ""));
      tally(r.flipped);
    }
  }
  return rc;
}

// ---------------------------------------------------------------------------

PsmOrder::PsmOrder(NodeId source, std::vector<NodeId> destinations)
    : source_(std::move(source)), dests_(std::move(destinations)) {
  std::sort(dests_.begin(), dests_.end());
  dests_.erase(std::unique(dests_.begin(), dests_.end()), dests_.end());
}

int PsmOrder::pair_index(std::pair<NodeId, NodeId> p) const {
  auto a = std::lower_bound(dests_.begin(), dests_.end(), p.first);
  auto b = std::lower_bound(dests_.begin(), dests_.end(), p.second);
  if (a == dests_.end() || *a != p.first || b == dests_.end() || *b != p.second || a == b)
    throw std::invalid_argument("pair " + pair_str(p) + " is not a pair of distinct destinations");
  int i = static_cast<int>(a - dests_.begin()), j = static_cast<int>(b - dests_.begin());
  if (i > j) std::swap(i, j);
  int n = static_cast<int>(dests_.size());
  // index of (i,j), i<j, in row-major upper triangle
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

void PsmOrder::add_less(std::pair<NodeId, NodeId> lo, std::pair<NodeId, NodeId> hi) {
  less_.push_back({pair_index(lo), pair_index(hi)});
  closed_ = false;
}

void PsmOrder::add_equal(std::pair<NodeId, NodeId> a, std::pair<NodeId, NodeId> b) {
  equal_.push_back({pair_index(a), pair_index(b)});
  closed_ = false;
}

PsmOrder PsmOrder::from_values(NodeId source, const std::map<std::pair<NodeId, NodeId>, double>& values) {
  std::set<NodeId> ds;
  for (const auto& [p, v] : values) ds.insert({p.first, p.second});
  PsmOrder order(std::move(source), {ds.begin(), ds.end()});
  std::vector<std::pair<std::pair<NodeId, NodeId>, double>> items(values.begin(), values.end());
  for (std::size_t x = 0; x < items.size(); ++x)
    for (std::size_t y = x + 1; y < items.size(); ++y) {
      if (items[x].second < items[y].second) order.add_less(items[x].first, items[y].first);
      else if (items[y].second < items[x].second) order.add_less(items[y].first, items[x].first);
      else order.add_equal(items[x].first, items[y].first);
    }
  return order;
}

PsmOrder PsmOrder::from_constraints(const ConstraintSet& cs, const NodeId& source,
                                    std::vector<NodeId> destinations, bool missing_is_equal) {
  PsmOrder order(source, std::move(destinations));
  order.missing_is_equal_ = missing_is_equal;
  for (const auto& r : cs.psms)
    if (r.source == source) order.add_less(r.lt[0], r.lt[1]);
  return order;
}

void PsmOrder::close() const {
  if (closed_) return;
  const int n = static_cast<int>(dests_.size());
  const int np = n * (n - 1) / 2;
  // union-find over equalities
  std::vector<int> uf(np);
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
  auto unite = [&](int a, int b) { uf[find(a)] = find(b); };
  for (auto [a, b] : equal_) unite(a, b);
  if (missing_is_equal_) {
    std::set<std::pair<int, int>> related;
    for (auto [a, b] : less_) related.insert({std::min(a, b), std::max(a, b)});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          if (i == j || i == k) continue;
          int a = pair_index({dests_[i], dests_[j]}), b = pair_index({dests_[i], dests_[k]});
          if (!related.count({std::min(a, b), std::max(a, b)})) unite(a, b);
        }
  }
  lt_.assign(np, std::vector<char>(np, 0));
  for (auto [a, b] : less_) lt_[find(a)][find(b)] = 1;
  for (int k = 0; k < np; ++k) {
    if (find(k) != k) continue;
    for (int i = 0; i < np; ++i) {
      if (!lt_[i][k]) continue;
      for (int j = 0; j < np; ++j)
        if (lt_[k][j]) lt_[i][j] = 1;
    }
  }
  for (int k = 0; k < np; ++k)
    if (find(k) == k && lt_[k][k]) throw OrderError("inconsistent (cyclic) PSM ordering for source " + source_);
  eq_.assign(np, std::vector<char>(np, 0));
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b) eq_[a][b] = find(a) == find(b);
  // Re-express the closure on raw indices through class representatives.
  std::vector<std::vector<char>> raw(np, std::vector<char>(np, 0));
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b) raw[a][b] = lt_[find(a)][find(b)];
  lt_ = std::move(raw);
  closed_ = true;
}

Order PsmOrder::compare(std::pair<NodeId, NodeId> a, std::pair<NodeId, NodeId> b) const {
  close();
  int x = pair_index(a), y = pair_index(b);
  if (eq_[x][y]) return Order::Equal;
  if (lt_[x][y]) return Order::Less;
  if (lt_[y][x]) return Order::Greater;
  return Order::Unknown;
}

namespace {

struct Cluster {
  std::vector<NodeId> members;  // members[0] is the representative
  bool is_leaf = true;
  int node = -1;  // index into `nodes` below
  std::pair<NodeId, NodeId> level;  // join pair, valid when !is_leaf
};

struct TreeNode {
  bool is_host = false;
  NodeId host;
  std::vector<int> children;
};

}  // namespace

SourceTree build_source_tree(const PsmOrder& order) {
  const auto& dests = order.destinations();
  SourceTree tree;
  tree.root = order.source();
  if (dests.empty()) return tree;

  std::vector<TreeNode> nodes;
  std::vector<Cluster> active;
  for (const auto& d : dests) {
    nodes.push_back(TreeNode{true, d, {}});
    active.push_back(Cluster{{d}, true, static_cast<int>(nodes.size()) - 1, {}});
  }
  auto psm_pair = [](const Cluster& x, const Cluster& y) { return std::pair{x.members[0], y.members[0]}; };
  auto cmp = [&](const std::pair<NodeId, NodeId>& a, const std::pair<NodeId, NodeId>& b) {
    return order.compare(sorted_pair(a.first, a.second), sorted_pair(b.first, b.second));
  };

  while (active.size() > 1) {
    int bx = -1, by = -1;
    bool unknown = false;
    for (std::size_t x = 0; x < active.size() && bx < 0; ++x) {
      for (std::size_t y = x + 1; y < active.size() && bx < 0; ++y) {
        auto xy = psm_pair(active[x], active[y]);
        bool ok = true;
        for (std::size_t z = 0; z < active.size() && ok; ++z) {
          if (z == x || z == y) continue;
          for (const auto& probe : {psm_pair(active[x], active[z]), psm_pair(active[y], active[z])}) {
            Order o = cmp(probe, xy);
            if (o == Order::Greater) ok = false;
            if (o == Order::Unknown) {
              unknown = true;
              ok = false;
            }
            if (!ok) break;
          }
        }
        if (ok) {
          bx = static_cast<int>(x);
          by = static_cast<int>(y);
        }
      }
    }
    if (bx < 0) {
      throw OrderError(unknown ? "insufficient PSM ordering information for source " + order.source()
                               : "inconsistent PSM ordering for source " + order.source());
    }
    Cluster cx = active[bx], cy = active[by];
    auto level = psm_pair(cx, cy);
    auto same_level = [&](const Cluster& c) {
      if (c.is_leaf) return false;
      Order o = cmp(c.level, level);
      if (o == Order::Unknown) throw OrderError("insufficient PSM ordering information for source " + order.source());
      return o == Order::Equal;
    };
    Cluster merged;
    merged.members = cx.members;
    merged.members.insert(merged.members.end(), cy.members.begin(), cy.members.end());
    merged.is_leaf = false;
    bool x_same = same_level(cx), y_same = same_level(cy);
    if (x_same) {
      merged.node = cx.node;
      merged.level = cx.level;
      if (y_same) {
        for (int c : nodes[cy.node].children) nodes[cx.node].children.push_back(c);
      } else {
        nodes[cx.node].children.push_back(cy.node);
      }
    } else if (y_same) {
      merged.node = cy.node;
      merged.level = cy.level;
      merged.members = cy.members;
      merged.members.insert(merged.members.end(), cx.members.begin(), cx.members.end());
      nodes[cy.node].children.push_back(cx.node);
    } else {
      nodes.push_back(TreeNode{false, {}, {cx.node, cy.node}});
      merged.node = static_cast<int>(nodes.size()) - 1;
      merged.level = level;
    }
    active.erase(active.begin() + by);
    active.erase(active.begin() + bx);
    active.insert(active.begin() + bx, merged);
  }

  // Emit segments: the root reaches the top cluster through one segment.
  std::function<void(std::optional<int>, int)> emit = [&](std::optional<int> from, int node) {
    Segment seg;
    seg.id = static_cast<int>(tree.segments.size());
    seg.from = from;
    if (nodes[node].is_host) {
      seg.to = SegmentEnd{true, -1, nodes[node].host};
      tree.leaves.insert(nodes[node].host);
      tree.segments.push_back(seg);
      return;
    }
    int b = tree.num_branch_points++;
    seg.to = SegmentEnd{false, b, {}};
    tree.segments.push_back(seg);
    auto kids = nodes[node].children;
    // deterministic child order: by smallest leaf below
    std::function<NodeId(int)> min_leaf = [&](int n) -> NodeId {
      if (nodes[n].is_host) return nodes[n].host;
      NodeId best;
      for (int c : nodes[n].children) {
        auto m = min_leaf(c);
        if (best.empty() || m < best) best = m;
      }
      return best;
    };
    std::sort(kids.begin(), kids.end(), [&](int a, int b2) { return min_leaf(a) < min_leaf(b2); });
    for (int c : kids) emit(b, c);
  };
  emit(std::nullopt, active[0].node);
  return tree;
}

// ---------------------------------------------------------------------------

std::string write_constraints(const ConstraintSet& cs) {
  using nlohmann::json;
  std::ostringstream out;
  for (const auto& r : cs.psms) {
    json j = {{"type", "psm"},
              {"s", r.source},
              {"lt", json::array({json::array({r.lt[0].first, r.lt[0].second}), json::array({r.lt[1].first, r.lt[1].second})})}};
    if (r.flipped) j["flipped"] = true;
    out << j.dump() << '\n';
  }
  for (const auto& r : cs.dms) {
    json j;
    if (r.kind == DmKind::Relative) {
      j = {{"type", "dm_rel"}, {"lt", json::array({json::array({r.lt[0].first, r.lt[0].second}), json::array({r.lt[1].first, r.lt[1].second})})}};
    } else {
      j = {{"type", "dm_abs"}, {"pair", json::array({r.lt[0].first, r.lt[0].second})}, {"hops", r.hops}};
    }
    if (r.flipped) j["flipped"] = true;
    out << j.dump() << '\n';
  }
  return out.str();
}

ConstraintSet read_constraints(std::string_view text) {
  using nlohmann::json;
  ConstraintSet cs;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      std::string type = j.at("type");
      bool flipped = j.value("flipped", false);
      if (type == "psm") {
        PsmTriple r;
        r.source = j.at("s");
        for (int k = 0; k < 2; ++k) r.lt[k] = {j.at("lt").at(k).at(0), j.at("lt").at(k).at(1)};
        r.flipped = flipped;
        cs.psms.push_back(r);
      } else if (type == "dm_rel") {
        DmRecord r;
        r.kind = DmKind::Relative;
        for (int k = 0; k < 2; ++k) r.lt[k] = {j.at("lt").at(k).at(0), j.at("lt").at(k).at(1)};
        r.flipped = flipped;
        cs.dms.push_back(r);
      } else if (type == "dm_abs") {
        DmRecord r;
        r.kind = DmKind::Absolute;
        r.lt[0] = {j.at("pair").at(0), j.at("pair").at(1)};
        r.hops = j.at("hops");
        if (r.hops < 1 && r.lt[0].first != r.lt[0].second) throw ParseError(lineno, "hop count must be >= 1");
        r.flipped = flipped;
        cs.dms.push_back(r);
      } else {
        throw ParseError(lineno, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return cs;
}

}  // namespace occam
