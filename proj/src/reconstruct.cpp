#include "occam/reconstruct.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace occam {

namespace {

std::vector<NodeId> host_names(const OccamIndex& ix) { return {ix.nodes.begin(), ix.nodes.begin() + ix.H()}; }

Network assemble(const OccamIndex& ix, std::map<HostPair, Path> paths) {
  Network net = network_from_paths(host_names(ix), std::move(paths));
  return net;
}

void require_assignment(const MipModel& model, const Solution& sol) {
  if (!sol.has_assignment() || sol.assignment.size() != model.vars.size())
    throw ReconstructError("solution carries no feasible assignment");
  if (model.index.s.empty()) throw ReconstructError("model has no source-link variables");
}

}  // namespace

Network graph_construct_1(const MipModel& model, const Solution& sol) {
  require_assignment(model, sol);
  const auto& ix = model.index;
  const int H = ix.H(), V = ix.V();
  std::map<HostPair, Path> paths;
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T) {
      if (S == T) continue;
      std::vector<int> rev{T};
      int cur = T;
      while (cur != S) {
        if (static_cast<int>(rev.size()) > V)
          throw ReconstructError("walk from " + ix.nodes[T] + " back to " + ix.nodes[S] + " exceeds |V| steps");
        int pred = -1;
        for (int i = 0; i < V; ++i) {
          if (i == cur || sol.value(ix.s_var(S, i, cur)) == 0) continue;
          if (pred >= 0)
            throw ReconstructError("node " + ix.nodes[cur] + " has two predecessors for source " + ix.nodes[S]);
          pred = i;
        }
        if (pred < 0)
          throw ReconstructError("no predecessor of " + ix.nodes[cur] + " for source " + ix.nodes[S]);
        rev.push_back(pred);
        cur = pred;
      }
      Path p;
      for (auto it = rev.rbegin(); it != rev.rend(); ++it) p.push_back(ix.nodes[*it]);
      paths[{ix.nodes[S], ix.nodes[T]}] = std::move(p);
    }
  return assemble(ix, std::move(paths));
}

Network graph_construct_2(const MipModel& model, const Solution& sol) {
  require_assignment(model, sol);
  const auto& ix = model.index;
  if (ix.num_segments == 0) throw ReconstructError("model has no segment variables");
  const int H = ix.H(), V = ix.V();
  std::map<HostPair, Path> paths;
  for (int S = 0; S < H; ++S) {
    std::vector<std::vector<int>> out(V);
    for (const auto& seg : ix.trees[S].segments) {
      int g = ix.seg_offset[S] + seg.id;
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j)
          if (i != j && sol.value(ix.p_var(g, i, j)) == 1) out[i].push_back(j);
    }
    // BFS by name order gives the lexicographically smallest shortest path
    for (auto& o : out) {
      std::sort(o.begin(), o.end(), [&](int a, int b) { return ix.nodes[a] < ix.nodes[b]; });
      o.erase(std::unique(o.begin(), o.end()), o.end());
    }
    std::vector<int> parent(V, -2);
    parent[S] = -1;
    std::deque<int> q{S};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : out[u])
        if (parent[v] == -2) {
          parent[v] = u;
          q.push_back(v);
        }
    }
    for (int T = 0; T < H; ++T) {
      if (T == S) continue;
      if (parent[T] == -2)
        throw ReconstructError(ix.nodes[T] + " unreachable from " + ix.nodes[S] + " inside its segment links");
      Path p;
      for (int c = T; c != -1; c = parent[c]) p.push_back(ix.nodes[c]);
      std::reverse(p.begin(), p.end());
      paths[{ix.nodes[S], ix.nodes[T]}] = std::move(p);
    }
  }
  return assemble(ix, std::move(paths));
}

nlohmann::json VerificationReport::to_json() const {
  return {
      {"ok", ok()},
      {"paths_ok", paths_ok},
      {"psm_ok", psm_ok},
      {"dm_ok", dm_ok},
      {"trees_ok", trees_ok},
      {"stitch_ok", stitch_ok},
      {"path_violations", path_violations},
      {"psm_violations", psm_violations},
      {"psm_link_violations", psm_link_violations},
      {"dm_violations", dm_violations},
      {"tree_violations", tree_violations},
      {"stitch_violations", stitch_violations},
      {"flipped_violations", flipped_violations},
      {"unflipped_violations", unflipped_violations},
  };
}

namespace {

void check_paths(const Network& net, VerificationReport& rep) {
  for (const auto& s : net.hosts)
    for (const auto& t : net.hosts) {
      if (s == t) continue;
      if (!net.paths.count({s, t})) rep.path_violations.push_back("missing path " + s + "->" + t);
    }
  for (auto& issue : check_network(net)) {
    bool tree_issue = issue.find("two predecessors") != std::string::npos;
    (tree_issue ? rep.tree_violations : rep.path_violations).push_back(std::move(issue));
  }
  rep.paths_ok = rep.path_violations.empty();
  rep.trees_ok = rep.tree_violations.empty();
}

}  // namespace

VerificationReport verify_solution(const Network& net, const ConstraintSet& cs) {
  VerificationReport rep;
  check_paths(net, rep);
  if (!rep.paths_ok) {
    rep.psm_ok = rep.dm_ok = false;
    return rep;
  }
  auto rc = check_records(net, cs);
  rep.psm_link_violations = rc.psm_link_violations;
  for (const auto& v : rc.psm_violations)
    if (v.find("[flipped]") == std::string::npos) rep.psm_violations.push_back(v);
  for (const auto& v : rc.dm_violations)
    if (v.find("[flipped]") == std::string::npos) rep.dm_violations.push_back(v);
  rep.flipped_violations = rc.flipped_violations;
  rep.unflipped_violations = rc.unflipped_violations;
  rep.psm_ok = rep.psm_violations.empty();
  rep.dm_ok = rep.dm_violations.empty();
  return rep;
}

VerificationReport verify_stitch(const Network& net, const std::map<NodeId, SourceTree>& trees,
                                 const std::vector<DmRecord>& dms) {
  ConstraintSet cs;
  cs.dms = dms;
  VerificationReport rep = verify_solution(net, cs);
  if (!rep.paths_ok) {
    rep.stitch_ok = false;
    return rep;
  }
  for (const auto& [h, want] : trees) {
    try {
      SourceTree got = source_tree_of(net, h);
      if (!isomorphic(got, want))
        rep.stitch_violations.push_back("source tree of " + h + " is " + got.canonical() + ", expected " +
                                        want.canonical());
    } catch (const std::exception& e) {
      rep.stitch_violations.push_back("source tree of " + h + ": " + e.what());
    }
  }
  rep.stitch_ok = rep.stitch_violations.empty();
  return rep;
}

std::vector<std::string> check_distance_and_membership(const MipModel& model, const Solution& sol,
                                                       const Network& net) {
  std::vector<std::string> out;
  const auto& ix = model.index;
  const int H = ix.H(), V = ix.V();
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T) {
      if (S == T) continue;
      const auto& p = net.path(ix.nodes[S], ix.nodes[T]);
      std::set<NodeId> on(p.begin(), p.end());
      auto m = sol.value(ix.m_var(S, T));
      if (m != static_cast<std::int64_t>(p.size()) - 1)
        out.push_back("m for " + ix.nodes[S] + "->" + ix.nodes[T] + " is " + std::to_string(m) + ", path has " +
                      std::to_string(p.size() - 1) + " hops");
      for (int j = 0; j < V; ++j) {
        bool member = on.count(ix.nodes[j]) != 0;
        if ((sol.value(ix.v_var(S, T, j)) == 1) != member)
          out.push_back("membership of " + ix.nodes[j] + " on " + ix.nodes[S] + "->" + ix.nodes[T] + " disagrees");
      }
    }
  return out;
}

}  // namespace occam
