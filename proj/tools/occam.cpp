// Command-line front end. Each subcommand wraps one library operation with
// file I/O; `run` executes a JSON stage list.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

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

namespace {

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") std::cout << content;
  else write_file(path, content);
}

struct ModelFlags {
  std::string network;      // ground truth DOT, supplies hosts and stitch trees
  std::string constraints;  // JSON lines
  std::string alpha, violation_weight;
  std::optional<int> node_budget;
  std::optional<std::int64_t> big_m, distance_bound;
  std::string mode = "hard", variant = "standard", trees_from = "psm";
  bool no_symmetry = false;

  void attach(CLI::App* app) {
    app->add_option("--network", network, "Ground-truth DOT (hosts, stitch trees)");
    app->add_option("--constraints", constraints, "Constraint file (JSON lines)")->required();
    app->add_option("--alpha", alpha, "Objective weight, e.g. 1/5");
    app->add_option("--node-budget", node_budget, "Anonymous internal nodes");
    app->add_option("--big-m", big_m, "Big-M constant");
    app->add_option("--distance-bound", distance_bound, "Upper bound on path lengths");
    app->add_option("--mode", mode, "hard or soft")->check(CLI::IsMember({"hard", "soft"}));
    app->add_option("--violation-weight", violation_weight, "Soft-mode penalty per violated record");
    app->add_option("--variant", variant, "standard or stitch")->check(CLI::IsMember({"standard", "stitch"}));
    app->add_option("--trees-from", trees_from, "Stitch trees: psm or ground")->check(CLI::IsMember({"psm", "ground"}));
    app->add_flag("--no-symmetry-breaking", no_symmetry, "Omit node-use ordering rows");
  }

  ModelConfig config() const {
    json j{{"mode", mode}, {"variant", variant}, {"symmetry_breaking", !no_symmetry}};
    if (!alpha.empty()) j["alpha"] = alpha;
    if (!violation_weight.empty()) j["violation_weight"] = violation_weight;
    if (node_budget) j["node_budget"] = *node_budget;
    if (big_m) j["big_m"] = *big_m;
    if (distance_bound) j["distance_bound"] = *distance_bound;
    return model_config_from_json(j);
  }

  std::optional<Network> ground() const {
    if (network.empty()) return std::nullopt;
    return parse_dot(read_file(network));
  }

  MipModel build() const {
    auto cs = read_constraints(read_file(constraints));
    auto g = ground();
    auto mc = config();
    std::vector<NodeId> hosts = g ? g->hosts : cs.hosts();
    if (mc.variant == ModelVariant::Stitch) {
      std::map<NodeId, SourceTree> trees;
      if (trees_from == "ground") {
        if (!g) throw CLI::ValidationError("--trees-from ground needs --network");
        trees = trees_from_network(*g);
      } else {
        trees = trees_from_psms(cs, hosts);
      }
      return build_stitch_model(trees, cs.dms, mc);
    }
    return build_occam_model(hosts, cs, mc);
  }
};

struct SolverFlags {
  std::string rel_gap = "3/20";
  double time_limit = 0;
  std::int64_t node_limit = 0;
  std::uint64_t seed = 0;
  void attach(CLI::App* app) {
    app->add_option("--rel-gap", rel_gap, "Relative gap, e.g. 3/20");
    app->add_option("--time-limit", time_limit, "Seconds, 0 for none");
    app->add_option("--node-limit", node_limit, "Search nodes, 0 for none");
    app->add_option("--solver-seed", seed, "Tie-break seed, 0 keeps id order");
  }
  SolverConfig config() const {
    return solver_config_from_json({{"rel_gap", rel_gap}, {"time_limit", time_limit}, {"node_limit", node_limit}, {"seed", seed}});
  }
};

int status_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Infeasible: return kExitInfeasible;
    case SolveStatus::Timeout:
    case SolveStatus::Unknown: return kExitTimeout;
    default: return kExitOk;
  }
}

std::string solve_summary(const Solution& sol) {
  json j{{"status", to_string(sol.status)}, {"nodes", sol.stats.nodes}, {"seconds", sol.stats.wall_seconds}};
  if (sol.has_assignment()) {
    j["objective"] = format_rational(sol.objective);
    j["bound"] = format_rational(sol.bound);
  }
  return j.dump() + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network topology inference from host path metrics"};
  app.require_subcommand(1);
  int exit_code = kExitOk;

  // routes
  std::string topo, hosts_file, generate, out;
  std::uint64_t seed = 0;
  auto* routes = app.add_subcommand("routes", "Shortest-hop routes for a topology, written as DOT");
  routes->add_option("--topology", topo, "Edge-list file");
  routes->add_option("--hosts", hosts_file, "Host list file");
  routes->add_option("--generate", generate, "Random instance spec as JSON, e.g. {\"kind\":\"tree\",\"hosts\":5}");
  routes->add_option("--seed", seed, "Generator seed");
  routes->add_option("-o,--output", out, "Output file (default stdout)");
  routes->callback([&] {
    Network net;
    if (!generate.empty()) net = generate_network(json::parse(generate), seed);
    else if (!topo.empty() && !hosts_file.empty()) net = compute_routes(parse_topology(read_file(topo)), parse_hosts(read_file(hosts_file)));
    else throw CLI::ValidationError("routes needs --generate or --topology with --hosts");
    emit(out, export_dot(net));
  });

  // measure
  std::string network, psm = "canonical", dm = "relative";
  auto* measure = app.add_subcommand("measure", "Derive PSM/DM records from a network");
  measure->add_option("--network", network, "Network DOT")->required();
  measure->add_option("--psm", psm, "none, canonical or all")->check(CLI::IsMember({"none", "canonical", "all"}));
  measure->add_option("--dm", dm, "none, relative or absolute")->check(CLI::IsMember({"none", "relative", "absolute"}));
  measure->add_option("-o,--output", out, "Output file");
  measure->callback([&] {
    auto net = parse_dot(read_file(network));
    emit(out, write_constraints(derive_constraints(net, parse_psm_sampling(psm), parse_dm_mode(dm))));
  });

  // perturb
  std::string constraints;
  double p = 0;
  auto* perturb = app.add_subcommand("perturb", "Flip relative records with probability p");
  perturb->add_option("--constraints", constraints, "Constraint file")->required();
  perturb->add_option("-p,--probability", p, "Flip probability")->check(CLI::Range(0.0, 1.0))->required();
  perturb->add_option("--seed", seed, "RNG seed")->required();
  perturb->add_option("-o,--output", out, "Output file");
  perturb->callback([&] { emit(out, write_constraints(inject_errors(read_constraints(read_file(constraints)), p, seed))); });

  // probesim
  std::string link_model;
  int trains = 500;
  double load_lo = 0, load_hi = 0.3;
  auto* probesim = app.add_subcommand("probesim", "Simulate probe trains and emit PSM/DM records");
  probesim->add_option("--network", network, "Network DOT")->required();
  probesim->add_option("--link-model", link_model, "Link parameters JSON");
  probesim->add_option("--load-lo", load_lo, "Random load lower bound");
  probesim->add_option("--load-hi", load_hi, "Random load upper bound");
  probesim->add_option("--trains", trains, "Trains per triple")->check(CLI::PositiveNumber);
  probesim->add_option("--seed", seed, "RNG seed")->required();
  probesim->add_option("-o,--output", out, "Output file");
  probesim->callback([&] {
    auto net = parse_dot(read_file(network));
    LinkModel lm = link_model.empty() ? random_link_model(net.graph, 1.0, load_lo, load_hi, derive_seed(seed, "loads"))
                                      : parse_link_model(read_file(link_model));
    auto pc = report_to_constraints(simulate_all(net, lm, trains, seed));
    emit(out, write_constraints(pc.constraints));
    std::cerr << "ties: " << pc.ties << "\n";
  });

  // model
  ModelFlags mf;
  auto* model = app.add_subcommand("model", "Build the model and print its size");
  mf.attach(model);
  model->callback([&] {
    auto m = mf.build();
    json kinds = json::object();
    for (auto k : {VarKind::SourceLink, VarKind::DestLink, VarKind::Distance, VarKind::NodeOnPath, VarKind::LinkPresence,
                   VarKind::LinAux, VarKind::SegmentLink, VarKind::BranchInd, VarKind::NodeUse, VarKind::Violation})
      if (auto n = m.count(k)) kinds[to_string(k)] = n;
    std::cout << json{{"variables", m.vars.size()}, {"rows", m.rows.size()}, {"by_kind", kinds}}.dump(2) << "\n";
  });

  // export-lp
  auto* export_cmd = app.add_subcommand("export-lp", "Write the model in CPLEX LP format");
  ModelFlags ef;
  ef.attach(export_cmd);
  export_cmd->add_option("-o,--output", out, "Output file");
  export_cmd->callback([&] { emit(out, export_lp(ef.build())); });

  // solve
  ModelFlags sf;
  SolverFlags sv;
  auto* solve_cmd = app.add_subcommand("solve", "Solve with the built-in branch and bound");
  sf.attach(solve_cmd);
  sv.attach(solve_cmd);
  solve_cmd->add_option("-o,--output", out, "Solution file (name value lines)");
  solve_cmd->callback([&] {
    auto m = sf.build();
    auto sol = solve(m, sv.config());
    if (sol.has_assignment()) emit(out, write_solution(m, sol));
    std::cerr << solve_summary(sol);
    exit_code = status_code(sol.status);
  });

  // import-sol
  std::string solution;
  ModelFlags imf;
  auto* import_cmd = app.add_subcommand("import-sol", "Check an external solution against the model");
  imf.attach(import_cmd);
  import_cmd->add_option("--solution", solution, "Solution file")->required();
  import_cmd->callback([&] {
    auto m = imf.build();
    try {
      auto sol = import_solution(m, read_file(solution));
      std::cout << solve_summary(sol);
    } catch (const SolutionError& e) {
      std::cerr << "rejected: " << e.what() << (e.row() >= 0 ? " (row " + m.rows[e.row()].name + ")" : "") << "\n";
      exit_code = kExitVerification;
    }
  });

  // reconstruct
  ModelFlags rf;
  bool verify = false;
  auto* reconstruct = app.add_subcommand("reconstruct", "Turn a solution into a network");
  rf.attach(reconstruct);
  reconstruct->add_option("--solution", solution, "Solution file")->required();
  reconstruct->add_flag("--verify", verify, "Check the result against the records");
  reconstruct->add_option("-o,--output", out, "Output DOT");
  reconstruct->callback([&] {
    auto m = rf.build();
    auto sol = import_solution(m, read_file(solution));
    Network inf = m.index.num_segments > 0 ? graph_construct_2(m, sol) : graph_construct_1(m, sol);
    emit(out, export_dot(inf));
    if (verify) {
      auto rep = verify_solution(inf, m.constraints);
      std::cerr << rep.to_json().dump(2) << "\n";
      if (!rep.ok()) exit_code = kExitVerification;
    }
  });

  // stitch
  ModelFlags stf;
  SolverFlags stv;
  auto* stitch = app.add_subcommand("stitch", "Infer a network from source trees and DMs");
  stf.attach(stitch);
  stv.attach(stitch);
  stitch->add_option("-o,--output", out, "Output DOT");
  stitch->callback([&] {
    stf.variant = "stitch";
    auto m = stf.build();
    auto sol = solve(m, stv.config());
    std::cerr << solve_summary(sol);
    if (!sol.has_assignment()) {
      exit_code = status_code(sol.status);
      return;
    }
    Network inf = graph_construct_2(m, sol);
    std::map<NodeId, SourceTree> trees;
    for (const auto& t : m.index.trees) trees[t.root] = t;
    auto rep = verify_stitch(inf, trees, m.constraints.dms);
    emit(out, export_dot(inf));
    if (!rep.ok()) {
      std::cerr << rep.to_json().dump(2) << "\n";
      exit_code = kExitVerification;
    } else if (sol.status == SolveStatus::Timeout) {
      exit_code = kExitTimeout;
    }
  });

  // eval
  std::string ground_file, inferred_file;
  int collapse = 0;
  bool as_json = false;
  auto* eval = app.add_subcommand("eval", "Score an inferred network against ground truth");
  eval->add_option("--ground", ground_file, "Ground-truth DOT")->required();
  eval->add_option("--inferred", inferred_file, "Inferred DOT")->required();
  eval->add_option("--collapse", collapse, "Ground-truth node pairs that may be contracted")->check(CLI::Range(0, 4));
  eval->add_flag("--json", as_json, "Full JSON report");
  eval->callback([&] {
    auto g = parse_dot(read_file(ground_file));
    auto i = parse_dot(read_file(inferred_file));
    auto r = collapse > 0 ? collapse_search(g, i, collapse) : evaluate(g, i);
    if (as_json) std::cout << r.to_json().dump(2) << "\n";
    else std::cout << json(r.ns).dump() << " " << json(r.ped).dump() << "\n";
  });

  // sweep and run
  std::string config_file, out_dir = "occam-out";
  int threads = 1;
  auto add_run = [&](CLI::App* cmd) {
    cmd->add_option("config", config_file, "Pipeline config or manifest (JSON)")->required();
    cmd->add_option("-o,--output-dir", out_dir, "Artifact directory");
    cmd->add_option("--threads", threads, "Parallel sweep runs")->check(CLI::PositiveNumber);
  };
  auto run_file = [&](bool sweep_only) {
    auto res = run_config_file(config_file, threads);
    if (sweep_only && res.artifacts.count("sweep.csv") == 0 && res.exit_code == kExitOk) {
      std::cerr << "config has no sweep stage\n";
      exit_code = kExitUsage;
      return;
    }
    write_artifacts(res, out_dir);
    for (const auto& line : res.log) std::cerr << line << "\n";
    if (!res.error.empty()) std::cerr << "error: " << res.error << "\n";
    if (res.eval) std::cout << "ns " << json(res.eval->ns).dump() << " ped " << json(res.eval->ped).dump() << "\n";
    if (sweep_only && res.artifacts.count("sweep.csv")) std::cout << res.artifacts.at("sweep.csv");
    exit_code = res.exit_code;
  };
  auto* sweep = app.add_subcommand("sweep", "Run a config's error sweep and print the summary CSV");
  add_run(sweep);
  sweep->callback([&] { run_file(true); });
  auto* run = app.add_subcommand("run", "Execute a pipeline config");
  add_run(run);
  run->callback([&] { run_file(false); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return exit_code;
}
