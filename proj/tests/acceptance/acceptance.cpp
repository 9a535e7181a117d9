// Acceptance suite. Prints one PASS/FAIL line per criterion.
//   occam_acceptance            run every criterion
//   occam_acceptance 6 8        run the listed ones
#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "occam/evaluate.hpp"
#include "occam/measurement.hpp"
#include "occam/model.hpp"
#include "occam/pipeline.hpp"
#include "occam/probesim.hpp"
#include "occam/reconstruct.hpp"
#include "occam/solver.hpp"
#include "occam/topology.hpp"

using namespace occam;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Instance suites shared between criteria

struct Run {
  std::uint64_t seed = 0;
  PipelineResult result;
  double seconds = 0;
};

json tree_suite_config(std::uint64_t seed) {
  return {{"seed", seed},
          {"stages", {"routes", "measure", "model", "solve", "reconstruct", "verify", "eval"}},
          {"routes", {{"generate", {{"kind", "tree"}, {"hosts", {4, 6}}, {"max_nodes", 10}}}}},
          {"measure", {{"psm", "canonical"}, {"dm", "absolute"}}},
          {"model", {{"alpha", 0}, {"write_lp", false}}},
          {"solve", {{"rel_gap", 0}}}};
}

json graph_suite_config(std::uint64_t seed, bool stitch) {
  json cfg = {{"seed", seed},
              {"stages", {"routes", "measure", "model", "solve", "reconstruct", "verify", "eval"}},
              {"routes", {{"generate", {{"kind", "graph"}, {"routers", {2, 4}}, {"extra_edges", {0, 2}}, {"hosts", {4, 5}}}}}},
              {"measure", {{"psm", "canonical"}, {"dm", "relative"}}},
              {"model", {{"alpha", "1/5"}, {"node_budget", 4}, {"write_lp", false}}},
              {"solve", {{"rel_gap", "3/20"}, {"time_limit", 300}}}};
  if (stitch) {
    cfg["stages"] = {"routes", "measure", "stitch", "model", "solve", "reconstruct", "verify", "eval"};
    cfg["measure"]["psm"] = "none";
    cfg["stitch"] = {{"trees_from", "ground"}};
    cfg["model"]["variant"] = "stitch";
  }
  return cfg;
}

std::vector<Run> run_suite(const std::function<json(std::uint64_t)>& make, int count, const char* label) {
  std::vector<Run> out;
  for (int k = 1; k <= count; ++k) {
    Run r;
    r.seed = static_cast<std::uint64_t>(k);
    auto t0 = Clock::now();
    r.result = run_pipeline(make(r.seed), ".");
    r.seconds = seconds_since(t0);
    std::cout << "    " << label << " seed " << k << ": exit " << r.result.exit_code;
    if (r.result.eval) std::cout << " ns " << fmt(r.result.eval->ns) << " ped " << fmt(r.result.eval->ped, 3);
    if (r.result.solution) std::cout << " status " << to_string(r.result.solution->status);
    std::cout << " " << fmt(r.seconds, 1) << " s\n" << std::flush;
    out.push_back(std::move(r));
  }
  return out;
}

const std::vector<Run>& tree_suite() {
  static std::vector<Run> runs = run_suite(tree_suite_config, 50, "tree");
  return runs;
}
const std::vector<Run>& graph_suite() {
  static std::vector<Run> runs = run_suite([](std::uint64_t s) { return graph_suite_config(s, false); }, 20, "graph");
  return runs;
}
const std::vector<Run>& stitch_suite() {
  static std::vector<Run> runs = run_suite([](std::uint64_t s) { return graph_suite_config(s, true); }, 20, "stitch");
  return runs;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto& runs = tree_suite();
  int exact = 0;
  for (const auto& r : runs)
    if (r.result.exit_code == kExitOk && r.result.eval && r.result.eval->ns == 100.0 && r.result.eval->ped == 0.0)
      ++exact;
  double summed = 0;
  for (const auto& r : runs) summed += r.seconds;
  return {exact == 50 && summed < 60,
          std::to_string(exact) + "/50 trees recovered exactly (NS 100, PED 0); " + fmt(summed, 1) + " s total (< 60 s)"};
}

Outcome criterion2() {
  int checked = 0, failed = 0;
  std::string first;
  auto check = [&](const std::vector<Run>& runs, const char* label) {
    for (const auto& r : runs) {
      if (!r.result.verification) continue;
      ++checked;
      const auto& v = *r.result.verification;
      if (!v.ok() || v.relation_violations() != 0) {
        ++failed;
        if (first.empty()) first = std::string(label) + " seed " + std::to_string(r.seed);
      }
    }
  };
  check(tree_suite(), "tree");
  check(graph_suite(), "graph");
  bool all_solved = true;
  for (const auto* suite : {&tree_suite(), &graph_suite()})
    for (const auto& r : *suite) all_solved = all_solved && r.result.verification.has_value();
  return {failed == 0 && checked == 70 && all_solved,
          std::to_string(checked) + " hard-mode solutions verified, " + std::to_string(failed) + " with violations" +
              (first.empty() ? "" : " (first: " + first + ")")};
}

Outcome criterion3() {
  int cases = 0, bad = 0;
  {
    MipModel m;
    int x = m.add_binary("x"), y = m.add_binary("y");
    auto lin = linearize(m, x, y, "z");
    for (int a = 0; a <= 1; ++a)
      for (int b = 0; b <= 1; ++b)
        for (int z = 0; z <= 1; ++z) {
          std::vector<std::int64_t> v(m.vars.size(), 0);
          v[x] = a, v[y] = b, v[lin.z] = z;
          bool holds = true;
          for (const auto& r : lin.rows) holds = holds && m.row_holds(r, v);
          ++cases;
          bad += holds != (z == a * b);
        }
  }
  for (int I = 1; I <= 6; ++I) {
    MipModel m;
    int i = m.add_integer("i", 0, I), b = m.add_binary("b");
    auto lin = linearize(m, i, b, "z");
    for (int iv = 0; iv <= I; ++iv)
      for (int bv = 0; bv <= 1; ++bv)
        for (int z = m.vars[lin.z].lb; z <= m.vars[lin.z].ub; ++z) {
          std::vector<std::int64_t> v(m.vars.size(), 0);
          v[i] = iv, v[b] = bv, v[lin.z] = z;
          bool holds = true;
          for (const auto& r : lin.rows) holds = holds && m.row_holds(r, v);
          ++cases;
          bad += holds != (z == iv * bv);
        }
  }
  return {bad == 0, std::to_string(cases) + " assignments enumerated, " + std::to_string(bad) + " mismatches"};
}

MipModel random_mip(std::uint64_t seed, int nb) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-3, 3), pick(0, nb - 1), sense(0, 2), den(1, 5), width(2, 5);
  MipModel m;
  for (int k = 0; k < nb; ++k) m.add_binary("x" + std::to_string(k));
  std::vector<int> planted(nb);
  for (auto& v : planted) v = static_cast<int>(rng() & 1);
  const int nrows = 3 + static_cast<int>(seed % 8);
  for (int r = 0; r < nrows; ++r) {
    Row row;
    row.name = "r" + std::to_string(r);
    std::set<int> used;
    for (int t = width(rng); t > 0; --t) {
      int v = pick(rng), c = coef(rng);
      if (c != 0 && used.insert(v).second) row.terms.push_back({v, c});
    }
    if (row.terms.empty()) row.terms.push_back({pick(rng), 1});
    row.sense = static_cast<Sense>(sense(rng));
    row.rhs = coef(rng) / 2;
    // most instances keep a planted point feasible
    if (seed % 4 != 0) {
      std::int64_t act = 0;
      for (const auto& t : row.terms) act += t.coeff * planted[t.var];
      if (row.sense == Sense::Eq) row.rhs = act;
      else if (row.sense == Sense::Le) row.rhs = std::max(row.rhs, act);
      else row.rhs = std::min(row.rhs, act);
    }
    m.add_row(row);
  }
  for (int v = 0; v < nb; ++v) {
    int c = coef(rng);
    if (c != 0) m.objective.push_back({v, Rational(c, den(rng))});
  }
  return m;
}

std::optional<Rational> brute_force(const MipModel& m) {
  const int n = static_cast<int>(m.vars.size());
  std::optional<Rational> best;
  std::vector<std::int64_t> x(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (int k = 0; k < n; ++k) x[k] = (mask >> k) & 1;
    bool ok = true;
    for (const auto& r : m.rows) {
      std::int64_t act = 0;
      for (const auto& t : r.terms) act += t.coeff * x[t.var];
      ok = r.sense == Sense::Le ? act <= r.rhs : r.sense == Sense::Ge ? act >= r.rhs : act == r.rhs;
      if (!ok) break;
    }
    if (!ok) continue;
    Rational f(0);
    for (const auto& [v, c] : m.objective) f += c * Rational(x[v]);
    if (!best || f < *best) best = f;
  }
  return best;
}

Outcome criterion4() {
  auto t0 = Clock::now();
  int exact_ok = 0, gap_ok = 0, feasible = 0;
  const Rational gap(3, 20);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto m = random_mip(seed, 8 + static_cast<int>(seed % 11));
    auto truth = brute_force(m);
    auto s0 = solve(m, SolverConfig{Rational(0), 0, 0, 0});
    auto sg = solve(m, SolverConfig{gap, 0, 0, 0});
    if (!truth) {
      exact_ok += s0.status == SolveStatus::Infeasible;
      gap_ok += sg.status == SolveStatus::Infeasible;
      continue;
    }
    ++feasible;
    exact_ok += s0.status == SolveStatus::Optimal && s0.objective == *truth && violated_rows(m, s0.assignment).empty();
    Rational scale = std::max(sg.objective < Rational(0) ? -sg.objective : sg.objective, Rational(1));
    gap_ok += sg.has_assignment() && violated_rows(m, sg.assignment).empty() && sg.objective - *truth <= gap * scale &&
              sg.bound <= *truth;
  }
  double t = seconds_since(t0);
  return {exact_ok == 100 && gap_ok == 100 && t < 120,
          "exact " + std::to_string(exact_ok) + "/100, gap bound " + std::to_string(gap_ok) + "/100 (" +
              std::to_string(feasible) + " feasible), " + fmt(t, 1) + " s (< 120 s)"};
}

Outcome criterion5() {
  auto g = parse_topology("A a\na b\nb c\nc C\na d\nd c\nd D\nb B\n");
  auto h = parse_topology("A 1\n1 2\n2 3\n3 C\n1 3\n4 3\n4 D\n2 B\n");
  auto ns = ns_score(g, h, {"A", "B", "C", "D"});
  NodeMapping phi;
  phi.pairs = {{"A", "A"}, {"C", "C"}, {"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}};
  auto p = ped({{{"A", "C"}, {"A", "a", "d", "c", "C"}}}, {{{"A", "C"}, {"A", "1", "3", "C"}}}, phi);
  bool ok = ns.matched == 7 && ns.union_size == 9 && std::abs(ns.ns - 77) <= 1 && p.per_pair.at({"A", "C"}) == 1;
  return {ok, "matched " + std::to_string(ns.matched) + ", union " + std::to_string(ns.union_size) + ", NS " +
                  fmt(ns.ns) + " (77 +-1), PED " + std::to_string(p.per_pair.at({"A", "C"}))};
}

Outcome criterion6() {
  const auto& runs = graph_suite();
  double ns = 0, ped = 0, slowest = 0;
  int solved = 0;
  for (const auto& r : runs) {
    slowest = std::max(slowest, r.seconds);
    if (!r.result.eval) continue;
    ++solved;
    ns += r.result.eval->ns;
    ped += r.result.eval->ped;
  }
  ns /= 20, ped /= 20;
  bool ok = solved == 20 && ns >= 90 && ped <= 0.5 && slowest < 300;
  return {ok, "mean NS " + fmt(ns) + " (>= 90), mean PED " + fmt(ped, 3) + " (<= 0.5), " + std::to_string(solved) +
                  "/20 solved, slowest " + fmt(slowest, 1) + " s (< 300 s)"};
}

Outcome criterion7() {
  json cfg = {{"seed", 1},
              {"stages", {"routes", "measure", "sweep"}},
              {"routes", {{"generate", {{"kind", "graph"}, {"routers", 3}, {"extra_edges", 1}, {"hosts", 4}}}}},
              {"measure", {{"psm", "canonical"}, {"dm", "relative"}}},
              {"model", {{"alpha", "1/5"}, {"mode", "soft"}, {"node_budget", 4}}},
              {"solve", {{"rel_gap", "3/20"}, {"time_limit", 300}}},
              {"sweep", {{"p", {0, 0.1, 0.2, 0.3, 0.4}}, {"seeds", 10}}}};
  auto r = run_pipeline(cfg, ".", static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  if (r.exit_code != kExitOk) return {false, "sweep failed: " + r.error};
  auto rows = json::parse(r.artifacts.at("sweep.json")).at("rows");
  std::map<double, double> mean;
  for (const auto& row : rows) mean[row.at("p").get<double>()] = row.at("mean_ns").get<double>();
  double low = (mean[0] + mean[0.1] + mean[0.2]) / 3;
  std::ostringstream d;
  d << "mean NS by p:";
  for (auto [p, v] : mean) d << " " << p << "->" << fmt(v, 1);
  d << "; NS(0) >= NS(0.4): " << (mean[0] >= mean[0.4] ? "yes" : "no") << "; mean NS(p<=0.2) " << fmt(low) << " (>= 80)";
  return {mean[0] >= mean[0.4] && low >= 80, d.str()};
}

Outcome criterion8() {
  const auto& std_runs = graph_suite();
  const auto& st_runs = stitch_suite();
  int within = 0, iso = 0;
  double worst = 0;
  for (std::size_t k = 0; k < st_runs.size(); ++k) {
    const auto& s = st_runs[k].result;
    const auto& h = std_runs[k].result;
    if (s.verification && s.verification->stitch_ok && s.verification->paths_ok) ++iso;
    if (!s.eval || !h.eval) continue;
    double diff = std::abs(s.eval->ns - h.eval->ns);
    worst = std::max(worst, diff);
    within += diff <= 3;
  }
  return {within == 20 && iso == 20, std::to_string(within) + "/20 instances within 3 NS points (largest gap " +
                                         fmt(worst) + "), " + std::to_string(iso) + "/20 pass the tree isomorphism check"};
}

Outcome criterion9() {
  auto net = compute_routes(parse_topology("A r1\nr1 B\nr1 r2\nr2 r3\nr3 C\nr3 D\n"), {"A", "B", "C", "D"});
  int right = 0, wrong = 0, untestable = 0, ttl_bad = 0;
  for (std::uint64_t run = 1; run <= 10; ++run) {
    auto lm = random_link_model(net.graph, 1.0, 0.05, 0.3, 100 + run);
    auto reports = simulate_all(net, lm, 500, run);
    for (const auto& rep : reports)
      for (const auto& [k, hops] : rep.ttl_hops) ttl_bad += hops != static_cast<int>(net.path(k.first, k.second).size()) - 1;
    auto cs = report_to_constraints(reports).constraints;
    for (const auto& p : cs.psms) {
      int lo = psm_value(net, p.source, p.lt[0].first, p.lt[0].second);
      int hi = psm_value(net, p.source, p.lt[1].first, p.lt[1].second);
      if (lo == hi) ++untestable;
      else if (lo < hi) ++right;
      else ++wrong;
    }
  }
  double frac = right + wrong > 0 ? 100.0 * right / (right + wrong) : 0;
  return {right + wrong > 0 && frac >= 90 && ttl_bad == 0,
          fmt(frac, 1) + "% of " + std::to_string(right + wrong) + " ordered PSM directions correct (>= 90%), " +
              std::to_string(untestable) + " emitted on equal-PSM triples, " + std::to_string(ttl_bad) +
              " TTL mismatches"};
}

// What an LP file carries, keyed by name. Row kinds, record links and the
// variable id order are not part of the format.
struct LpContent {
  struct Var {
    std::int64_t lb = 0, ub = 1;
    bool integer = false;
    bool operator==(const Var&) const = default;
  };
  struct LpRow {
    std::string name;
    std::vector<std::pair<std::string, std::int64_t>> terms;
    std::string sense;
    std::int64_t rhs = 0;
    bool operator==(const LpRow&) const = default;
  };
  std::map<std::string, Var> vars;
  std::vector<LpRow> rows;
  std::map<std::string, Rational> objective;
  Rational constant{0};
  bool operator==(const LpContent&) const = default;
};

LpContent lp_content(const MipModel& m) {
  LpContent out;
  for (const auto& v : m.vars) out.vars[v.name] = {v.lb, v.ub, v.integer};
  for (const auto& r : m.rows) {
    LpContent::LpRow row{r.name, {}, r.sense == Sense::Le ? "<=" : r.sense == Sense::Ge ? ">=" : "=", r.rhs};
    for (const auto& t : r.terms) row.terms.push_back({m.vars[t.var].name, t.coeff});
    out.rows.push_back(row);
  }
  for (const auto& [v, c] : m.objective)
    if (c != Rational(0)) out.objective[m.vars[v].name] += c;
  out.constant = m.objective_constant;
  return out;
}

bool numeric(const std::string& t) {
  std::size_t k = t[0] == '-' ? 1 : 0;
  return k < t.size() && (std::isdigit(static_cast<unsigned char>(t[k])) || t[k] == '.');
}

// Independent reader for the LP text export_lp writes.
LpContent parse_lp(const std::string& text) {
  LpContent out;
  std::istringstream in(text);
  std::string line, section;
  std::vector<std::string> statements;  // objective and rows, continuation lines joined
  std::vector<std::string> generals, binaries;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> bounds;
  const std::set<std::string> headers{"Minimize", "Subject To", "Bounds", "Generals", "Binaries", "End"};
  while (std::getline(in, line)) {
    if (headers.count(line)) {
      section = line;
      continue;
    }
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (section == "Minimize" || section == "Subject To") {
      if (first.back() == ':') statements.push_back(line);
      else statements.back() += " " + line;
    } else if (section == "Bounds") {
      std::string op, x, op2, y;
      ls >> op >> x;
      if (op == "=") bounds[first] = {std::stoll(x), std::stoll(x)};
      else {
        ls >> op2 >> y;
        bounds[x] = {std::stoll(first), std::stoll(y)};
      }
    } else if (section == "Generals") {
      generals.push_back(first);
    } else if (section == "Binaries") {
      binaries.push_back(first);
    }
  }
  for (const auto& v : binaries) out.vars[v] = {0, 1, false};
  for (const auto& v : generals) out.vars[v] = {0, 1, true};
  for (const auto& [v, b] : bounds) {
    out.vars.at(v).lb = b.first;
    out.vars.at(v).ub = b.second;
  }
  for (const auto& st : statements) {
    std::istringstream ls(st);
    std::string name, tok;
    ls >> name;
    name.pop_back();
    bool objective = name == "obj" && out.rows.empty() && out.objective.empty();
    LpContent::LpRow row{name, {}, "", 0};
    int sign = 1;
    std::string coeff;
    while (ls >> tok) {
      if (tok == "+" || tok == "-") {
        sign = tok == "-" ? -1 : 1;
      } else if (tok == "<=" || tok == ">=" || tok == "=") {
        row.sense = tok;
        ls >> row.rhs;
      } else if (numeric(tok)) {
        if (tok[0] == '-') sign = -sign, tok = tok.substr(1);
        coeff = tok;
      } else {
        if (tok[0] == '-') sign = -sign, tok = tok.substr(1);
        Rational c = coeff.empty() ? Rational(1) : parse_rational(coeff);
        if (sign < 0) c = -c;
        if (objective) {
          if (c != Rational(0)) out.objective[tok] += c;
        } else {
          row.terms.push_back({tok, boost::rational_cast<std::int64_t>(c)});
        }
        sign = 1;
        coeff.clear();
      }
    }
    if (objective) {
      if (!coeff.empty()) out.constant = sign < 0 ? -parse_rational(coeff) : parse_rational(coeff);
    } else {
      out.rows.push_back(row);
    }
  }
  return out;
}

bool lp_round_trips(const MipModel& m, std::string& why) {
  auto a = lp_content(m), b = parse_lp(export_lp(m));
  if (a.vars != b.vars) return why = "variables", false;
  if (a.rows != b.rows) return why = "rows", false;
  if (a.objective != b.objective || a.constant != b.constant) return why = "objective", false;
  return true;
}

Outcome criterion10() {
  std::vector<std::string> failures;
  int checks = 0;
  auto expect = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    auto g = random_connected_graph(4 + seed % 3, seed % 3, rng);
    auto hs = attach_hosts(g, 4, rng);
    auto net = compute_routes(g, hs);
    expect(parse_topology(format_topology(g)) == g, "topology seed " + std::to_string(seed));
    expect(parse_dot(export_dot(net)) == net, "dot seed " + std::to_string(seed));
    auto cs = inject_errors(derive_constraints(net, PsmSampling::Canonical, DmMode::Relative), 0.2, seed);
    expect(read_constraints(write_constraints(cs)) == cs, "constraints seed " + std::to_string(seed));
    ModelConfig mc;
    mc.mode = seed % 2 ? ModelMode::Soft : ModelMode::Hard;
    auto m = build_occam_model(net.hosts, cs, mc);
    std::string why;
    expect(lp_round_trips(m, why), "lp seed " + std::to_string(seed) + ": " + why);
    if (seed <= 3) {
      ModelConfig small;
      small.node_budget = static_cast<int>(net.graph.num_nodes() - net.hosts.size());
      auto hard = build_occam_model(net.hosts, derive_constraints(net, PsmSampling::Canonical, DmMode::Absolute), small);
      auto sol = solve(hard, SolverConfig{});
      if (sol.has_assignment()) {
        auto back = import_solution(hard, write_solution(hard, sol));
        expect(back.assignment == sol.assignment && back.objective == sol.objective,
               "solution seed " + std::to_string(seed));
      } else {
        expect(false, "solution seed " + std::to_string(seed) + " unsolved");
      }
    }
  }
  // manifest replay
  auto dir = fs::temp_directory_path() / "occam_acceptance_manifest";
  fs::remove_all(dir);
  for (std::uint64_t seed : {1u, 2u}) {
    json cfg = graph_suite_config(seed, false);
    cfg["stages"].push_back("sweep");
    cfg["sweep"] = {{"p", {0, 0.2}}, {"seeds", 2}};
    cfg["routes"]["generate"] = {{"kind", "tree"}, {"hosts", 4}, {"max_nodes", 6}};
    auto first = run_pipeline(cfg, ".");
    write_artifacts(first, dir);
    auto replay = run_config_file(dir / "manifest.json");
    bool same = replay.manifest == first.manifest && replay.artifacts == first.artifacts;
    auto out2 = dir / "replay";
    write_artifacts(replay, out2);
    for (const auto& [name, content] : first.artifacts) same = same && read_file(out2 / name) == content;
    same = same && read_file(out2 / "manifest.json") == read_file(dir / "manifest.json");
    expect(first.exit_code == kExitOk && same, "manifest replay seed " + std::to_string(seed));
    fs::remove_all(dir);
  }
  std::string detail = std::to_string(checks - failures.size()) + "/" + std::to_string(checks) + " round trips exact";
  if (!failures.empty()) detail += " (first failure: " + failures.front() + ")";
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, Outcome (*)()>> criteria{
      {1, {"tree recovery", criterion1}},        {2, {"hard-mode verification", criterion2}},
      {3, {"linearization exactness", criterion3}}, {4, {"solver exactness", criterion4}},
      {5, {"metric fixture", criterion5}},       {6, {"desk-scale inference quality", criterion6}},
      {7, {"robustness shape", criterion7}},     {8, {"tree stitching", criterion8}},
      {9, {"probe simulation", criterion9}},     {10, {"format round trips", criterion10}},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) {
    int id = std::atoi(argv[k]);
    if (!criteria.count(id)) {
      std::cerr << "unknown criterion " << argv[k] << "\n";
      return 2;
    }
    selected.push_back(id);
  }
  if (selected.empty())
    for (const auto& [id, c] : criteria) selected.push_back(id);

  int failed = 0;
  std::vector<std::string> lines;
  for (int id : selected) {
    const auto& [name, fn] = criteria.at(id);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  criterion " + std::to_string(id) + " (" + name +
                       "): " + o.detail;
    std::cout << line << "\n" << std::flush;
    lines.push_back(line);
  }
  if (selected.size() > 1) {
    std::cout << "\nsummary\n";
    for (const auto& l : lines) std::cout << l << "\n";
  }
  return failed == 0 ? 0 : 1;
}
