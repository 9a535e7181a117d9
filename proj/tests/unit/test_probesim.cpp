#include <doctest.h>

#include <cmath>
#include <random>

#include "occam/probesim.hpp"

using namespace occam;

namespace {

// S reaches T1 and T2 through the shared link r1-r2; T3 branches off at r1.
Network bottleneck() {
  return compute_routes(parse_topology("S r1\nr1 r2\nr2 T1\nr2 T2\nr1 T3\n"), {"S", "T1", "T2", "T3"});
}

LinkModel uniform(double load) {
  LinkModel lm;
  lm.fallback = LinkParams{1.0, load};
  return lm;
}

double sample_sd(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("zero load gives deterministic delays") {
  auto net = bottleneck();
  auto rep = simulate_trains(net, uniform(0.0), "S", {"T1", "T2", "T3"}, 50, 1);
  for (int r = 0; r < 3; ++r) {
    const double hops = static_cast<double>(net.path("S", rep.receivers[r]).size() - 1);
    REQUIRE(rep.delays[r].size() == 50);
    for (double d : rep.delays[r]) CHECK(d == doctest::Approx(hops));
    for (int c = 0; c < 3; ++c) CHECK(rep.cov[r][c] == doctest::Approx(0));
  }
  auto pc = report_to_constraints({rep});
  CHECK(pc.constraints.psms.empty());
  CHECK(pc.ties == 1);
  CHECK(pc.constraints.dms.size() == 3);
}

TEST_CASE("TTL hop counts equal path lengths") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    auto g = random_connected_graph(4, 2, rng);
    auto hs = attach_hosts(g, 4, rng);
    auto net = compute_routes(g, hs);
    for (const auto& rep : simulate_all(net, uniform(0.2), 20, seed))
      for (const auto& [k, h] : rep.ttl_hops) CHECK(h == static_cast<int>(net.path(k.first, k.second).size()) - 1);
  }
}

TEST_CASE("zero-load DMs equal the absolute ground-truth DMs") {
  std::mt19937_64 rng(4);
  auto g = random_connected_graph(4, 1, rng);
  auto hs = attach_hosts(g, 4, rng);
  auto net = compute_routes(g, hs);
  auto probe = report_to_constraints(simulate_all(net, uniform(0.0), 10, 3)).constraints;
  auto truth = derive_constraints(net, PsmSampling::None, DmMode::Absolute);
  auto key = [](const ConstraintSet& cs) {
    std::set<std::tuple<NodeId, NodeId, int>> out;
    for (const auto& r : cs.dms) out.insert({r.lt[0].first, r.lt[0].second, r.hops});
    return out;
  };
  CHECK(key(probe) == key(truth));
  CHECK(probe.dms.size() == truth.dms.size());
}

TEST_CASE("covariance comparison sets the PSM direction") {
  ProbeReport rep;
  rep.source = "S";
  rep.receivers = {"T1", "T2", "T3"};
  for (auto& d : rep.delays) d = {1.0, 2.0};
  rep.cov[0][1] = rep.cov[1][0] = 0.5;
  rep.cov[1][2] = rep.cov[2][1] = 0.2;
  auto cs = report_to_constraints({rep}).constraints;
  REQUIRE(cs.psms.size() == 1);
  CHECK(cs.psms[0].source == "S");
  CHECK(cs.psms[0].lt[0] == std::pair<NodeId, NodeId>{"T2", "T3"});
  CHECK(cs.psms[0].lt[1] == std::pair<NodeId, NodeId>{"T1", "T2"});
  std::swap(rep.cov[0][1], rep.cov[1][2]);
  rep.cov[1][0] = rep.cov[0][1];
  rep.cov[2][1] = rep.cov[1][2];
  auto rev = report_to_constraints({rep}).constraints;
  REQUIRE(rev.psms.size() == 1);
  CHECK(rev.psms[0].lt[0] == std::pair<NodeId, NodeId>{"T1", "T2"});
}

TEST_CASE("shared bottleneck orders covariances") {
  auto net = bottleneck();
  int correct = 0;
  const int runs = 100;
  for (int seed = 1; seed <= runs; ++seed) {
    auto rep = simulate_trains(net, uniform(0.3), "S", {"T1", "T2", "T3"}, 500, seed);
    correct += rep.cov[0][1] > rep.cov[1][2];
  }
  CHECK(correct >= 95);
}

TEST_CASE("covariance of link-disjoint receivers vanishes") {
  auto net = bottleneck();
  LinkModel lm = uniform(0.4);
  lm.links[make_edge("S", "r1")] = LinkParams{1.0, 0.0};
  const int n = 4000;
  for (int seed = 1; seed <= 5; ++seed) {
    auto rep = simulate_trains(net, lm, "S", {"T1", "T2", "T3"}, n, seed);
    double se = sample_sd(rep.delays[0]) * sample_sd(rep.delays[2]) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(rep.cov[0][2]) <= 3 * se);
    CHECK(rep.cov[0][2] == rep.cov[2][0]);
  }
}

TEST_CASE("simulation is reproducible") {
  auto net = bottleneck();
  auto a = simulate_all(net, uniform(0.25), 30, 9);
  auto b = simulate_all(net, uniform(0.25), 30, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].delays == b[k].delays);
    CHECK(a[k].cov == b[k].cov);
  }
  CHECK(simulate_all(net, uniform(0.25), 30, 10)[0].delays != a[0].delays);
}

TEST_CASE("simulate_trains argument checks") {
  auto net = bottleneck();
  CHECK_THROWS_AS(simulate_trains(net, uniform(0.1), "S", {"T1", "T1", "T3"}, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_trains(net, uniform(0.1), "S", {"T1", "T2", "X"}, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_trains(net, uniform(0.1), "S", {"T1", "T2", "T3"}, 0, 1), std::invalid_argument);
}

TEST_CASE("link model file round trip and validation") {
  auto net = bottleneck();
  auto lm = random_link_model(net.graph, 2.0, 0.1, 0.3, 5);
  CHECK(lm.links.size() == net.graph.num_edges());
  for (const auto& [e, p] : lm.links) {
    CHECK(p.load >= 0.1);
    CHECK(p.load <= 0.3);
  }
  CHECK(parse_link_model(write_link_model(lm)) == lm);
  CHECK(lm.at("r2", "r1") == lm.at("r1", "r2"));
  CHECK_THROWS(parse_link_model(R"({"default": {"base_delay": 1, "load": 1.0}})"));
  CHECK_THROWS(parse_link_model(R"({"default": {"base_delay": 0, "load": 0.1}})"));
}
