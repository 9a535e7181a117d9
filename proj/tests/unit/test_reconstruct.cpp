#include <doctest.h>

#include <random>

#include "occam/evaluate.hpp"
#include "occam/model.hpp"
#include "occam/reconstruct.hpp"
#include "occam/solver.hpp"

using namespace occam;

namespace {

SolverConfig exact() { return SolverConfig{Rational(0), 0, 0, 0}; }

int internal_nodes(const Network& net) { return static_cast<int>(net.graph.num_nodes() - net.hosts.size()); }

std::map<NodeId, SourceTree> ground_trees(const Network& net) {
  std::map<NodeId, SourceTree> out;
  for (const auto& h : net.hosts) out.emplace(h, source_tree_of(net, h));
  return out;
}

Network tree_network(std::uint64_t seed, int hosts, int max_nodes) {
  std::mt19937_64 rng(seed);
  auto g = random_tree(hosts, max_nodes, rng);
  std::vector<NodeId> hs;
  for (const auto& n : g.nodes())
    if (n[0] == 'H') hs.push_back(n);
  return compute_routes(g, hs);
}

}  // namespace

TEST_CASE("two hosts joined by one link") {
  ConstraintSet cs;
  DmRecord r;
  r.kind = DmKind::Absolute;
  r.lt[0] = {"A", "B"};
  r.hops = 1;
  cs.dms.push_back(r);
  ModelConfig cfg;
  cfg.node_budget = 0;
  auto m = build_occam_model({"A", "B"}, cs, cfg);
  auto sol = solve(m, exact());
  REQUIRE(sol.has_assignment());
  auto net = graph_construct_1(m, sol);
  CHECK(net.path("A", "B") == Path{"A", "B"});
  CHECK(net.path("B", "A") == Path{"B", "A"});
  CHECK(net.graph.num_edges() == 1);
}

TEST_CASE("tree instances are reconstructed exactly") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto truth = tree_network(seed, 3 + seed % 2, 5);
    auto cs = derive_constraints(truth, PsmSampling::Canonical, DmMode::Absolute);
    ModelConfig cfg;
    cfg.alpha = Rational(0);
    cfg.node_budget = internal_nodes(truth);
    auto m = build_occam_model(truth.hosts, cs, cfg);
    auto sol = solve(m, exact());
    REQUIRE(sol.status == SolveStatus::Optimal);
    auto net = graph_construct_1(m, sol);
    CHECK(check_network(net).empty());
    auto rep = evaluate(truth, net);
    CHECK(rep.ns == doctest::Approx(100));
    CHECK(rep.ped == 0);
    CHECK(verify_solution(net, cs).ok());
    CHECK(check_distance_and_membership(m, sol, net).empty());
  }
}

TEST_CASE("ground truth verifies against its own constraints") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    auto g = random_connected_graph(4, 2, rng);
    auto hs = attach_hosts(g, 4, rng);
    auto net = compute_routes(g, hs);
    auto cs = derive_constraints(net, PsmSampling::AllPairs, DmMode::Relative);
    auto rep = verify_solution(net, cs);
    CHECK(rep.ok());
    CHECK(rep.relation_violations() == 0);
    auto st = verify_stitch(net, ground_trees(net), cs.dms);
    CHECK(st.ok());
  }
}

TEST_CASE("verification reports a broken network") {
  auto net = compute_routes(parse_topology("A r\nr B\nr C\n"), {"A", "B", "C"});
  ConstraintSet cs;
  DmRecord r;
  r.kind = DmKind::Absolute;
  r.lt[0] = {"A", "B"};
  r.hops = 3;
  cs.dms.push_back(r);
  auto rep = verify_solution(net, cs);
  CHECK(!rep.dm_ok);
  CHECK(rep.dm_violations.size() == 1);
  CHECK(!rep.ok());
  auto other = compute_routes(parse_topology("A r\nr B\nr q\nq C\n"), {"A", "B", "C"});
  auto chain = verify_stitch(net, ground_trees(other), {});
  CHECK(chain.ok());  // same logical trees, a chain node is invisible
  auto split = compute_routes(parse_topology("A r\nr B\nr q\nq C\nq D\n"), {"A", "B", "C", "D"});
  auto star = compute_routes(parse_topology("A r\nr B\nr C\nr D\n"), {"A", "B", "C", "D"});
  CHECK(!verify_stitch(star, ground_trees(split), {}).stitch_ok);
}

TEST_CASE("soft solves only break flipped records") {
  auto truth = tree_network(3, 4, 6);
  auto cs = inject_errors(derive_constraints(truth, PsmSampling::Canonical, DmMode::Relative), 0.2, 4);
  ModelConfig cfg;
  cfg.mode = ModelMode::Soft;
  cfg.node_budget = internal_nodes(truth);
  auto m = build_occam_model(truth.hosts, cs, cfg);
  auto sol = solve(m, exact());
  REQUIRE(sol.has_assignment());
  auto net = graph_construct_1(m, sol);
  auto rep = verify_solution(net, cs);
  CHECK(rep.paths_ok);
  CHECK(rep.trees_ok);
  CHECK(rep.relation_violations() <= static_cast<int>(cs.num_flipped()));
}

TEST_CASE("stitch on single-segment trees matches the standard construction") {
  auto truth = compute_routes(parse_topology("A x\nx B\n"), {"A", "B"});
  auto cs = derive_constraints(truth, PsmSampling::None, DmMode::Absolute);
  ModelConfig cfg;
  cfg.node_budget = 1;
  auto m1 = build_occam_model(truth.hosts, cs, cfg);
  auto n1 = graph_construct_1(m1, solve(m1, exact()));
  cfg.variant = ModelVariant::Stitch;
  auto m2 = build_stitch_model(ground_trees(truth), cs.dms, cfg);
  auto n2 = graph_construct_2(m2, solve(m2, exact()));
  CHECK(n1 == n2);
}

TEST_CASE("stitch recovers a hub") {
  auto truth = compute_routes(parse_topology("R A\nR B\nR C\nR D\n"), {"A", "B", "C", "D"});
  auto cs = derive_constraints(truth, PsmSampling::None, DmMode::Relative);
  ModelConfig cfg;
  cfg.node_budget = 2;
  cfg.variant = ModelVariant::Stitch;
  auto trees = ground_trees(truth);
  auto m = build_stitch_model(trees, cs.dms, cfg);
  auto sol = solve(m, exact());
  REQUIRE(sol.status == SolveStatus::Optimal);
  auto net = graph_construct_2(m, sol);
  CHECK(net.graph.num_nodes() == 5);
  CHECK(net.graph.num_edges() == 4);
  CHECK(evaluate(truth, net).ns == doctest::Approx(100));
  auto rep = verify_stitch(net, trees, cs.dms);
  CHECK(rep.ok());
  for (const auto& h : truth.hosts) CHECK(isomorphic(source_tree_of(net, h), trees.at(h)));
}

TEST_CASE("stitched trees match their inputs on random instances") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto truth = tree_network(seed + 20, 4, 6);
    auto cs = derive_constraints(truth, PsmSampling::None, DmMode::Relative);
    ModelConfig cfg;
    cfg.node_budget = internal_nodes(truth);
    cfg.variant = ModelVariant::Stitch;
    auto trees = ground_trees(truth);
    auto m = build_stitch_model(trees, cs.dms, cfg);
    auto sol = solve(m, SolverConfig{});
    REQUIRE(sol.has_assignment());
    auto net = graph_construct_2(m, sol);
    CHECK(verify_stitch(net, trees, cs.dms).ok());
  }
}

TEST_CASE("verification report json") {
  auto net = compute_routes(parse_topology("A r\nr B\nr C\n"), {"A", "B", "C"});
  auto js = verify_solution(net, derive_constraints(net, PsmSampling::Canonical, DmMode::Relative)).to_json();
  CHECK(js.contains("paths_ok"));
}
