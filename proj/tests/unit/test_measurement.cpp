#include <doctest.h>

#include <cmath>
#include <random>

#include "occam/measurement.hpp"

using namespace occam;

namespace {

std::set<Edge> path_edges(const Path& p) {
  std::set<Edge> out;
  for (std::size_t k = 1; k < p.size(); ++k) out.insert(make_edge(p[k - 1], p[k]));
  return out;
}

int oracle_links(const Network& net, const NodeId& s, const NodeId& a, const NodeId& b) {
  auto ea = path_edges(net.path(s, a)), eb = path_edges(net.path(s, b));
  int n = 0;
  for (const auto& e : ea) n += eb.count(e);
  return n;
}

int oracle_nodes(const Network& net, const NodeId& s, const NodeId& a, const NodeId& b) {
  const auto& pa = net.path(s, a);
  const auto& pb = net.path(s, b);
  std::set<NodeId> na(pa.begin(), pa.end());
  int n = 0;
  for (const auto& x : std::set<NodeId>(pb.begin(), pb.end())) n += na.count(x);
  return n;
}

// A reaches F after one router, B after two, E after three and C, D after four.
Network fig1_like() {
  return compute_routes(parse_topology("A a\na F\na b\nb B\nb c\nc E\nc d\nd C\nd D\n"),
                        {"A", "B", "C", "D", "E", "F"});
}

Network random_network(std::uint64_t seed, int routers, int chords, int hosts) {
  std::mt19937_64 rng(seed);
  auto g = random_connected_graph(routers, chords, rng);
  auto hs = attach_hosts(g, hosts, rng);
  return compute_routes(g, hs);
}

std::map<std::pair<NodeId, NodeId>, double> exact_psms(const Network& net, const NodeId& s) {
  std::map<std::pair<NodeId, NodeId>, double> v;
  for (const auto& a : net.hosts)
    for (const auto& b : net.hosts)
      if (a < b && a != s && b != s) v[{a, b}] = psm_value(net, s, a, b);
  return v;
}

}  // namespace

TEST_CASE("psm_value on simple shapes") {
  auto star = compute_routes(parse_topology("S r\nr A\nr B\n"), {"A", "B", "S"});
  CHECK(psm_value(star, "S", "A", "B") == 1);
  auto split = compute_routes(parse_topology("S A\nS B\n"), {"A", "B", "S"});
  CHECK(psm_value(split, "S", "A", "B") == 0);
  // shared up to the last hop on a line
  auto line = compute_routes(parse_topology("S x\nx y\ny z\nz T\nz U\n"), {"S", "T", "U"});
  CHECK(psm_value(line, "S", "T", "U") == static_cast<int>(line.path("S", "T").size()) - 2);
  CHECK(psm_value(line, "S", "T", "U") == oracle_links(line, "S", "T", "U"));
}

TEST_CASE("psm and dm values match set-intersection oracles") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto net = random_network(seed, 3 + seed % 3, seed % 3, 4);
    for (const auto& s : net.hosts)
      for (const auto& a : net.hosts)
        for (const auto& b : net.hosts) {
          if (a == s || b == s || a == b) continue;
          CHECK(psm_value(net, s, a, b) == oracle_links(net, s, a, b));
          CHECK(psm_node_value(net, s, a, b) == oracle_nodes(net, s, a, b));
          CHECK(psm_node_value(net, s, a, b) == psm_value(net, s, a, b) + 1);
        }
    for (const auto& [key, p] : net.paths) CHECK(dm_value(net, key.first, key.second) == static_cast<int>(p.size()) - 1);
  }
}

TEST_CASE("fig-1-like relations") {
  auto net = fig1_like();
  CHECK(psm_value(net, "A", "C", "E") < psm_value(net, "A", "C", "D"));
  CHECK(dm_value(net, "A", "F") < dm_value(net, "A", "D"));
}

TEST_CASE("derive_constraints: two hosts") {
  auto net = compute_routes(parse_topology("A x\nx B\n"), {"A", "B"});
  auto cs = derive_constraints(net, PsmSampling::Canonical, DmMode::Absolute);
  CHECK(cs.psms.empty());
  REQUIRE(cs.dms.size() == 2);
  CHECK(cs.dms[0].hops == 2);
  CHECK(derive_constraints(net, PsmSampling::Canonical, DmMode::Relative).dms.empty());
}

TEST_CASE("derive_constraints: absolute DM on a line") {
  auto net = compute_routes(parse_topology("A x\nx y\ny B\n"), {"A", "B"});
  auto cs = derive_constraints(net, PsmSampling::None, DmMode::Absolute);
  bool found = false;
  for (const auto& r : cs.dms)
    if (r.lt[0] == HostPair{"A", "B"}) {
      CHECK(r.hops == 3);
      found = true;
    }
  CHECK(found);
}

TEST_CASE("derive_constraints relations hold when recomputed") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto net = random_network(seed, 3 + seed % 3, seed % 3, 5);
    for (auto sampling : {PsmSampling::Canonical, PsmSampling::AllPairs}) {
      auto cs = derive_constraints(net, sampling, DmMode::Relative);
      for (const auto& r : cs.psms)
        CHECK(oracle_links(net, r.source, r.lt[0].first, r.lt[0].second) <
              oracle_links(net, r.source, r.lt[1].first, r.lt[1].second));
      for (const auto& r : cs.dms)
        CHECK(net.path(r.lt[0].first, r.lt[0].second).size() < net.path(r.lt[1].first, r.lt[1].second).size());
      auto rc = check_records(net, cs);
      CHECK(rc.psm_violations.empty());
      CHECK(rc.psm_link_violations.empty());
      CHECK(rc.dm_violations.empty());
      if (sampling == PsmSampling::Canonical)
        for (const auto& r : cs.psms) {
          std::set<NodeId> ends{r.lt[0].first, r.lt[0].second, r.lt[1].first, r.lt[1].second};
          CHECK(ends.size() == 3);
        }
    }
  }
}

TEST_CASE("inject_errors edge probabilities") {
  auto net = random_network(4, 4, 1, 5);
  auto cs = derive_constraints(net, PsmSampling::Canonical, DmMode::Relative);
  REQUIRE(!cs.psms.empty());
  auto same = inject_errors(cs, 0.0, 9);
  CHECK(same == cs);
  CHECK(same.num_flipped() == 0);
  auto all = inject_errors(cs, 1.0, 9);
  CHECK(all.num_flipped() == cs.psms.size() + cs.dms.size());
  for (std::size_t k = 0; k < cs.psms.size(); ++k) {
    CHECK(all.psms[k].lt[0] == cs.psms[k].lt[1]);
    CHECK(all.psms[k].lt[1] == cs.psms[k].lt[0]);
  }
  auto abs = derive_constraints(net, PsmSampling::None, DmMode::Absolute);
  CHECK(inject_errors(abs, 1.0, 1) == abs);
  CHECK_THROWS_AS(inject_errors(cs, 1.5, 1), std::invalid_argument);
  CHECK(inject_errors(cs, 0.3, 77) == inject_errors(cs, 0.3, 77));
}

TEST_CASE("inject_errors flip count is binomial") {
  ConstraintSet cs;
  for (int k = 0; k < 1000; ++k) {
    DmRecord r;
    r.lt[0] = {"S", "a" + std::to_string(k)};
    r.lt[1] = {"S", "b" + std::to_string(k)};
    cs.dms.push_back(r);
  }
  const double mean = 1000 * 0.2, sd = std::sqrt(1000 * 0.2 * 0.8);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    double flipped = static_cast<double>(inject_errors(cs, 0.2, seed).num_flipped());
    CHECK(std::abs(flipped - mean) <= 3 * sd);
  }
}

TEST_CASE("check_records attributes violations to flipped records") {
  auto net = random_network(11, 4, 2, 5);
  auto cs = inject_errors(derive_constraints(net, PsmSampling::Canonical, DmMode::Relative), 0.3, 5);
  auto rc = check_records(net, cs);
  CHECK(rc.unflipped_violations == 0);
  CHECK(static_cast<std::size_t>(rc.flipped_violations) == cs.num_flipped());
}

TEST_CASE("canonicalize drops duplicates and sorts pairs") {
  ConstraintSet cs;
  cs.psms.push_back(PsmTriple{"S", {{"b", "a"}, {"c", "b"}}, false});
  cs.psms.push_back(PsmTriple{"S", {{"a", "b"}, {"b", "c"}}, false});
  cs.canonicalize();
  REQUIRE(cs.psms.size() == 1);
  CHECK(cs.psms[0].lt[0] == std::pair<NodeId, NodeId>{"a", "b"});
  CHECK(cs.hosts() == std::vector<NodeId>{"S", "a", "b", "c"});
}

TEST_CASE("constraint JSON-lines round trip") {
  auto net = random_network(8, 4, 2, 5);
  auto cs = inject_errors(derive_constraints(net, PsmSampling::Canonical, DmMode::Relative), 0.25, 2);
  auto abs = derive_constraints(net, PsmSampling::None, DmMode::Absolute);
  cs.dms.insert(cs.dms.end(), abs.dms.begin(), abs.dms.end());
  auto text = write_constraints(cs);
  CHECK(read_constraints(text) == cs);
  CHECK(write_constraints(read_constraints(text)) == text);
  auto one = read_constraints("{\"type\":\"dm_abs\",\"pair\":[\"A\",\"B\"],\"hops\":2}\n");
  REQUIRE(one.dms.size() == 1);
  CHECK(one.dms[0].kind == DmKind::Absolute);
  CHECK_THROWS(read_constraints("{\"type\":\"bogus\"}\n"));
}

TEST_CASE("build_source_tree: two destinations") {
  PsmOrder order("S", {"a", "b"});
  auto t = build_source_tree(order);
  CHECK(t.num_branch_points == 1);
  CHECK(t.canonical() == "S:[(a,b)]");
}

TEST_CASE("build_source_tree: fig-1-like merge order") {
  auto net = fig1_like();
  auto t = build_source_tree(PsmOrder::from_values("A", exact_psms(net, "A")));
  CHECK(t.canonical() == source_tree_of(net, "A").canonical());
  CHECK(t.canonical() == "A:[((((C,D),E),B),F)]");
}

TEST_CASE("build_source_tree reproduces ground-truth trees") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto net = random_network(seed, 2 + seed % 4, seed % 3, 3 + seed % 3);
    auto cs = derive_constraints(net, PsmSampling::Canonical, DmMode::None);
    for (const auto& s : net.hosts) {
      auto truth = source_tree_of(net, s).canonical();
      auto values = exact_psms(net, s);
      CHECK(build_source_tree(PsmOrder::from_values(s, values)).canonical() == truth);
      for (auto& [k, v] : values) v = std::exp(v) * 3 + 1;
      CHECK(build_source_tree(PsmOrder::from_values(s, values)).canonical() == truth);
      std::vector<NodeId> dests;
      for (const auto& h : net.hosts)
        if (h != s) dests.push_back(h);
      CHECK(build_source_tree(PsmOrder::from_constraints(cs, s, dests)).canonical() == truth);
    }
  }
}

TEST_CASE("build_source_tree rejects cyclic orders") {
  PsmOrder order("S", {"a", "b", "c"});
  order.add_less({"a", "b"}, {"b", "c"});
  order.add_less({"b", "c"}, {"a", "c"});
  order.add_less({"a", "c"}, {"a", "b"});
  CHECK_THROWS_AS(build_source_tree(order), OrderError);
}
