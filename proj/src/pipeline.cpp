#include "occam/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "occam/probesim.hpp"

namespace occam {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose) {
  std::uint64_t x = master ^ fnv1a(purpose);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return parse_rational(j.dump());
  throw std::invalid_argument("expected a number or a rational string, got " + j.dump());
}

ModelConfig model_config_from_json(const json& j) {
  static const std::set<std::string> known{"alpha", "node_budget", "big_m", "distance_bound", "mode",
                                           "violation_weight", "variant", "symmetry_breaking", "write_lp"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::invalid_argument("unknown model key '" + k + "'");
  ModelConfig c;
  if (j.contains("alpha")) c.alpha = rational_from_json(j["alpha"]);
  if (j.contains("node_budget")) c.node_budget = j["node_budget"].get<int>();
  if (j.contains("big_m")) c.big_m = j["big_m"].get<std::int64_t>();
  if (j.contains("distance_bound")) c.distance_bound = j["distance_bound"].get<std::int64_t>();
  if (j.contains("violation_weight")) c.violation_weight = rational_from_json(j["violation_weight"]);
  if (j.contains("symmetry_breaking")) c.symmetry_breaking = j["symmetry_breaking"].get<bool>();
  if (j.contains("mode")) {
    auto m = j["mode"].get<std::string>();
    if (m == "hard") c.mode = ModelMode::Hard;
    else if (m == "soft") c.mode = ModelMode::Soft;
    else throw std::invalid_argument("mode must be hard or soft");
  }
  if (j.contains("variant")) {
    auto v = j["variant"].get<std::string>();
    if (v == "standard") c.variant = ModelVariant::Standard;
    else if (v == "stitch") c.variant = ModelVariant::Stitch;
    else throw std::invalid_argument("variant must be standard or stitch");
  }
  return c;
}

SolverConfig solver_config_from_json(const json& j) {
  static const std::set<std::string> known{"rel_gap", "time_limit", "node_limit", "seed"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::invalid_argument("unknown solver key '" + k + "'");
  SolverConfig c;
  if (j.contains("rel_gap")) c.rel_gap = rational_from_json(j["rel_gap"]);
  if (j.contains("time_limit")) c.time_limit = j["time_limit"].get<double>();
  if (j.contains("node_limit")) c.node_limit = j["node_limit"].get<std::int64_t>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (c.rel_gap < 0) throw std::invalid_argument("rel_gap must be non-negative");
  return c;
}

namespace {

int draw(const json& spec, const char* key, int fallback, std::mt19937_64& rng) {
  if (!spec.contains(key)) return fallback;
  const auto& v = spec[key];
  if (v.is_array()) {
    if (v.size() != 2) throw std::invalid_argument(std::string(key) + " range must be [lo, hi]");
    int lo = v[0].get<int>(), hi = v[1].get<int>();
    if (lo > hi) throw std::invalid_argument(std::string(key) + " range is empty");
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }
  return v.get<int>();
}

}  // namespace

Network generate_network(const json& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto kind = spec.value("kind", std::string("tree"));
  if (kind == "tree") {
    int h = draw(spec, "hosts", 4, rng);
    int max_nodes = draw(spec, "max_nodes", 2 * h, rng);
    Graph g = random_tree(h, max_nodes, rng);
    std::vector<NodeId> hosts;
    for (const auto& n : g.nodes())
      if (g.neighbors(n).size() == 1) hosts.push_back(n);
    return compute_routes(g, hosts);
  }
  if (kind == "graph") {
    int n = draw(spec, "routers", 3, rng);
    int extra = draw(spec, "extra_edges", 1, rng);
    int h = draw(spec, "hosts", 4, rng);
    Graph g = random_connected_graph(n, extra, rng);
    auto hosts = attach_hosts(g, h, rng);
    return compute_routes(g, hosts);
  }
  throw std::invalid_argument("generate.kind must be tree or graph");
}

std::map<NodeId, SourceTree> trees_from_network(const Network& net) {
  std::map<NodeId, SourceTree> out;
  for (const auto& h : net.hosts) out[h] = source_tree_of(net, h);
  return out;
}

std::map<NodeId, SourceTree> trees_from_psms(const ConstraintSet& cs, const std::vector<NodeId>& hosts) {
  std::map<NodeId, SourceTree> out;
  for (const auto& s : hosts) {
    std::vector<NodeId> dests;
    for (const auto& h : hosts)
      if (h != s) dests.push_back(h);
    out[s] = build_source_tree(PsmOrder::from_constraints(cs, s, dests));
  }
  return out;
}

namespace {

json trees_json(const std::map<NodeId, SourceTree>& trees) {
  json j = json::object();
  for (const auto& [h, t] : trees) j[h] = t.canonical();
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json solve_json(const Solution& sol) {
  json j{{"status", to_string(sol.status)}, {"nodes", sol.stats.nodes}, {"probes", sol.stats.probes}};
  if (sol.has_assignment()) {
    j["objective"] = format_rational(sol.objective);
    j["bound"] = format_rational(sol.bound);
  }
  return j;
}

std::vector<NodeId> model_hosts(const std::optional<Network>& ground, const ConstraintSet& cs) {
  if (ground) return ground->hosts;
  auto h = cs.hosts();
  if (h.empty()) throw std::invalid_argument("no hosts: neither a ground truth nor any record");
  return h;
}

struct Context {
  json config;
  fs::path base;
  std::uint64_t seed = 0;
  int threads = 1;
  json seeds = json::object();
  json inputs = json::object();
  std::optional<Network> ground;
  std::optional<ConstraintSet> cs;
  std::optional<std::map<NodeId, SourceTree>> trees;
  std::optional<MipModel> model;
  std::optional<Solution> sol;
  std::optional<Network> inferred;
  PipelineResult* out = nullptr;
  bool timed_out = false;

  const json& section(const char* name) const {
    static const json empty = json::object();
    return config.contains(name) ? config[name] : empty;
  }
  std::uint64_t stage_seed(const std::string& name) {
    const auto& sec = section(name.c_str());
    std::uint64_t s = sec.contains("seed") ? sec["seed"].get<std::uint64_t>() : derive_seed(seed, name);
    seeds[name] = s;
    return s;
  }
  std::string input(const std::string& rel) {
    fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
    std::string text = read_file(p);
    inputs[rel] = hex64(fnv1a(text));
    return text;
  }
  ModelConfig model_config() const { return model_config_from_json(strip(section("model"), {"write_lp"})); }
  static json strip(json j, std::initializer_list<const char*> keys) {
    for (auto k : keys) j.erase(k);
    return j;
  }
};

void stage_routes(Context& c) {
  const auto& sec = c.section("routes");
  if (sec.contains("generate")) {
    c.ground = generate_network(sec["generate"], c.stage_seed("routes"));
  } else if (sec.contains("network")) {
    c.ground = parse_dot(c.input(sec["network"].get<std::string>()));
  } else if (sec.contains("topology")) {
    if (!sec.contains("hosts")) throw std::invalid_argument("topology needs a hosts file");
    Graph g = parse_topology(c.input(sec["topology"].get<std::string>()));
    c.ground = compute_routes(g, parse_hosts(c.input(sec["hosts"].get<std::string>())));
  } else {
    throw std::invalid_argument("routes needs generate, network or topology+hosts");
  }
  auto issues = check_network(*c.ground);
  if (!issues.empty()) throw std::invalid_argument("ground truth breaks routing invariants: " + issues.front());
  c.out->artifacts["ground.dot"] = export_dot(*c.ground);
}

void stage_measure(Context& c) {
  const auto& sec = c.section("measure");
  if (!c.ground) throw std::invalid_argument("measure needs the routes stage");
  c.cs = derive_constraints(*c.ground, parse_psm_sampling(sec.value("psm", std::string("canonical"))),
                            parse_dm_mode(sec.value("dm", std::string("relative"))));
  c.out->artifacts["constraints.jsonl"] = write_constraints(*c.cs);
}

void stage_constraints_file(Context& c) {
  const auto& sec = c.section("constraints");
  if (!sec.contains("file")) throw std::invalid_argument("constraints needs a file");
  c.cs = read_constraints(c.input(sec["file"].get<std::string>()));
  c.out->artifacts["constraints.jsonl"] = write_constraints(*c.cs);
}

void stage_probesim(Context& c) {
  const auto& sec = c.section("probesim");
  if (!c.ground) throw std::invalid_argument("probesim needs the routes stage");
  std::uint64_t seed = c.stage_seed("probesim");
  LinkModel lm;
  if (sec.contains("link_model")) {
    lm = parse_link_model(c.input(sec["link_model"].get<std::string>()));
  } else {
    double lo = 0.0, hi = 0.3;
    if (sec.contains("load")) {
      lo = sec["load"].at(0).get<double>();
      hi = sec["load"].at(1).get<double>();
    }
    lm = random_link_model(c.ground->graph, sec.value("base_delay", 1.0), lo, hi, derive_seed(seed, "loads"));
  }
  auto reports = simulate_all(*c.ground, lm, sec.value("trains", 500), seed);
  auto pc = report_to_constraints(reports);
  c.cs = pc.constraints;
  c.out->artifacts["link_model.json"] = write_link_model(lm);
  c.out->artifacts["constraints.jsonl"] = write_constraints(*c.cs);
  c.out->artifacts["probesim.json"] =
      dump({{"triples", reports.size()}, {"psms", c.cs->psms.size()}, {"dms", c.cs->dms.size()}, {"ties", pc.ties}});
}

void stage_perturb(Context& c) {
  const auto& sec = c.section("perturb");
  if (!c.cs) throw std::invalid_argument("perturb needs constraints");
  double p = sec.value("p", 0.0);
  if (p < 0 || p > 1) throw std::invalid_argument("p must lie in [0,1]");
  c.cs = inject_errors(*c.cs, p, c.stage_seed("perturb"));
  c.out->artifacts["constraints.jsonl"] = write_constraints(*c.cs);
}

void stage_stitch(Context& c) {
  const auto& sec = c.section("stitch");
  auto from = sec.value("trees_from", std::string(c.ground ? "ground" : "psm"));
  if (from == "ground") {
    if (!c.ground) throw std::invalid_argument("trees_from=ground needs the routes stage");
    c.trees = trees_from_network(*c.ground);
  } else if (from == "psm") {
    if (!c.cs) throw std::invalid_argument("trees_from=psm needs constraints");
    c.trees = trees_from_psms(*c.cs, model_hosts(c.ground, *c.cs));
  } else {
    throw std::invalid_argument("trees_from must be ground or psm");
  }
  c.out->artifacts["trees.json"] = dump(trees_json(*c.trees));
}

MipModel build_model(const ModelConfig& mc, const std::optional<Network>& ground, const ConstraintSet& cs,
                     const std::optional<std::map<NodeId, SourceTree>>& trees) {
  if (mc.variant == ModelVariant::Stitch) {
    if (!trees) throw std::invalid_argument("the stitch variant needs the stitch stage");
    return build_stitch_model(*trees, cs.dms, mc);
  }
  return build_occam_model(model_hosts(ground, cs), cs, mc);
}

void stage_model(Context& c) {
  if (!c.cs) throw std::invalid_argument("model needs constraints");
  c.model = build_model(c.model_config(), c.ground, *c.cs, c.trees);
  if (c.section("model").value("write_lp", true)) c.out->artifacts["model.lp"] = export_lp(*c.model);
  json kinds = json::object();
  for (auto k : {VarKind::SourceLink, VarKind::DestLink, VarKind::Distance, VarKind::NodeOnPath, VarKind::LinkPresence,
                 VarKind::LinAux, VarKind::SegmentLink, VarKind::BranchInd, VarKind::NodeUse, VarKind::Violation})
    if (auto n = c.model->count(k)) kinds[to_string(k)] = n;
  c.out->artifacts["model.json"] = dump({{"variables", c.model->vars.size()}, {"rows", c.model->rows.size()},
                                         {"by_kind", kinds}, {"big_m", c.model->big_m}});
}

void finish_solution(Context& c) {
  const auto& sol = *c.sol;
  c.out->artifacts["solve.json"] = dump(solve_json(sol));
  if (sol.has_assignment()) c.out->artifacts["solution.txt"] = write_solution(*c.model, sol);
  c.out->log.push_back("solve: " + std::string(to_string(sol.status)) + " in " +
                       std::to_string(sol.stats.wall_seconds) + " s");
  switch (sol.status) {
    case SolveStatus::Infeasible:
      throw StageError("solve", "model is infeasible", kExitInfeasible);
    case SolveStatus::Unknown:
      throw StageError("solve", "limit reached before a feasible assignment was found", kExitTimeout);
    case SolveStatus::Timeout:
      c.timed_out = true;
      break;
    default:
      break;
  }
}

void stage_solve(Context& c) {
  if (!c.model) throw std::invalid_argument("solve needs the model stage");
  auto sc = solver_config_from_json(c.section("solve"));
  c.sol = solve(*c.model, sc);
  finish_solution(c);
}

void stage_import(Context& c) {
  if (!c.model) throw std::invalid_argument("import-sol needs the model stage");
  const auto& sec = c.section("import-sol");
  if (!sec.contains("file")) throw std::invalid_argument("import-sol needs a file");
  try {
    c.sol = import_solution(*c.model, c.input(sec["file"].get<std::string>()));
  } catch (const SolutionError& e) {
    throw StageError("import-sol", e.what(), kExitVerification);
  }
  finish_solution(c);
}

void stage_reconstruct(Context& c) {
  if (!c.model || !c.sol) throw std::invalid_argument("reconstruct needs a solution");
  c.inferred = c.model->index.num_segments > 0 ? graph_construct_2(*c.model, *c.sol) : graph_construct_1(*c.model, *c.sol);
  c.out->artifacts["inferred.dot"] = export_dot(*c.inferred);
}

void stage_verify(Context& c) {
  if (!c.inferred || !c.cs) throw std::invalid_argument("verify needs the reconstruct stage");
  const auto mc = c.model_config();
  VerificationReport rep;
  if (mc.variant == ModelVariant::Stitch) rep = verify_stitch(*c.inferred, *c.trees, c.cs->dms);
  else rep = verify_solution(*c.inferred, *c.cs);
  auto mismatch = c.model->index.num_segments > 0 ? std::vector<std::string>{}
                                                  : check_distance_and_membership(*c.model, *c.sol, *c.inferred);
  json j = rep.to_json();
  j["distance_membership"] = mismatch;
  c.out->artifacts["verify.json"] = dump(j);
  c.out->verification = rep;
  // soft mode may trade relations for simplicity; structure must still hold
  bool structural = rep.paths_ok && rep.trees_ok && rep.stitch_ok && mismatch.empty();
  bool relations = rep.psm_ok && rep.dm_ok;
  if (!structural || (mc.mode == ModelMode::Hard && !relations))
    throw StageError("verify", "inferred network fails verification", kExitVerification);
}

void stage_eval(Context& c) {
  if (!c.ground || !c.inferred) throw std::invalid_argument("eval needs routes and reconstruct");
  int pairs = c.section("eval").value("collapse_pairs", 0);
  EvalReport r = pairs > 0 ? collapse_search(*c.ground, *c.inferred, pairs) : evaluate(*c.ground, *c.inferred);
  c.out->artifacts["eval.json"] = dump(r.to_json());
  c.out->artifacts["eval.csv"] = eval_csv_header() + eval_csv_row("run", r);
  c.out->eval = r;
}

struct SweepRun {
  double p = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string status;
  double ns = 0, ped = 0;
  int violations = 0;
  std::string error;
};

void stage_sweep(Context& c) {
  const auto& sec = c.section("sweep");
  if (!c.ground || !c.cs) throw std::invalid_argument("sweep needs routes and measure");
  std::vector<double> ps = sec.value("p", std::vector<double>{0, 0.1, 0.2, 0.3, 0.4, 0.5});
  int reps = sec.value("seeds", 10);
  int pairs = c.section("eval").value("collapse_pairs", 0);
  json model_sec = Context::strip(c.section("model"), {"write_lp"});
  if (!model_sec.contains("mode")) model_sec["mode"] = "soft";
  const ModelConfig mc = model_config_from_json(model_sec);
  const SolverConfig sc = solver_config_from_json(c.section("solve"));
  std::uint64_t base = c.stage_seed("sweep");

  std::vector<SweepRun> runs;
  for (double p : ps)
    for (int r = 0; r < reps; ++r) {
      SweepRun run;
      run.p = p;
      run.rep = r;
      run.seed = derive_seed(base, "p=" + json(p).dump() + "/" + std::to_string(r));
      runs.push_back(run);
    }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < runs.size();) {
      auto& run = runs[k];
      try {
        auto cs = inject_errors(*c.cs, run.p, run.seed);
        auto model = build_model(mc, c.ground, cs, c.trees);
        auto sol = solve(model, sc);
        run.status = to_string(sol.status);
        if (!sol.has_assignment()) continue;
        Network inf = model.index.num_segments > 0 ? graph_construct_2(model, sol) : graph_construct_1(model, sol);
        auto r = pairs > 0 ? collapse_search(*c.ground, inf, pairs) : evaluate(*c.ground, inf);
        run.ns = r.ns;
        run.ped = r.ped;
        run.violations = verify_solution(inf, cs).relation_violations();
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  int t = std::max(1, std::min<int>(c.threads, static_cast<int>(runs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ostringstream per_run, summary;
  per_run << "p,rep,seed,status,ns,ped,relation_violations\n";
  summary << "p,runs,mean_ns,mean_ped\n";
  json rows = json::array();
  for (const auto& run : runs) {
    if (!run.error.empty()) throw std::runtime_error("sweep run p=" + json(run.p).dump() + " rep " +
                                                     std::to_string(run.rep) + ": " + run.error);
    per_run << json(run.p).dump() << "," << run.rep << "," << run.seed << "," << run.status << "," << json(run.ns).dump()
            << "," << json(run.ped).dump() << "," << run.violations << "\n";
  }
  std::vector<double> means;
  for (double p : ps) {
    double ns = 0, ped = 0;
    int n = 0;
    for (const auto& run : runs)
      if (run.p == p) ns += run.ns, ped += run.ped, ++n;
    ns /= n;
    ped /= n;
    means.push_back(ns);
    summary << json(p).dump() << "," << n << "," << json(ns).dump() << "," << json(ped).dump() << "\n";
    rows.push_back({{"p", p}, {"runs", n}, {"mean_ns", ns}, {"mean_ped", ped}});
  }
  bool non_increasing = true;
  for (std::size_t k = 1; k < means.size(); ++k) non_increasing = non_increasing && means[k] <= means[k - 1];
  c.out->artifacts["sweep_runs.csv"] = per_run.str();
  c.out->artifacts["sweep.csv"] = summary.str();
  c.out->artifacts["sweep.json"] =
      dump({{"rows", rows},
            {"ns_first_ge_last", means.empty() || means.front() >= means.back()},
            {"ns_non_increasing", non_increasing}});
}

using StageFn = void (*)(Context&);
const std::map<std::string, StageFn>& stage_table() {
  static const std::map<std::string, StageFn> t{
      {"routes", stage_routes},   {"measure", stage_measure}, {"constraints", stage_constraints_file},
      {"probesim", stage_probesim}, {"perturb", stage_perturb}, {"stitch", stage_stitch},
      {"model", stage_model},     {"solve", stage_solve},     {"import-sol", stage_import},
      {"reconstruct", stage_reconstruct}, {"verify", stage_verify}, {"eval", stage_eval},
      {"sweep", stage_sweep},
  };
  return t;
}

}  // namespace

PipelineResult run_pipeline(const json& config, const fs::path& base_dir, int threads) {
  PipelineResult result;
  Context c;
  c.config = config;
  c.base = base_dir;
  c.threads = threads;
  c.out = &result;
  std::vector<std::string> stages;
  try {
    if (!config.is_object()) throw StageError("config", "must be a JSON object", kExitUsage);
    const auto& sd = config.contains("seed") ? config["seed"] : json();
    if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<std::int64_t>() >= 0))
      throw StageError("config", "a non-negative integer 'seed' is required", kExitUsage);
    if (!config.contains("stages") || !config["stages"].is_array())
      throw StageError("config", "'stages' must be a list", kExitUsage);
    c.seed = config["seed"].get<std::uint64_t>();
    for (const auto& s : config["stages"]) {
      auto name = s.get<std::string>();
      if (!stage_table().count(name)) throw StageError("config", "unknown stage '" + name + "'", kExitUsage);
      stages.push_back(name);
    }
  } catch (const StageError& e) {
    result.exit_code = e.code();
    result.error = e.what();
    return result;
  }
  for (const auto& name : stages) {
    try {
      stage_table().at(name)(c);
    } catch (const StageError& e) {
      result.exit_code = e.code();
      result.error = e.what();
      break;
    } catch (const std::exception& e) {
      result.exit_code = kExitOther;
      result.error = name + ": " + e.what();
      break;
    }
  }
  if (result.exit_code == kExitOk && c.timed_out) result.exit_code = kExitTimeout;
  result.ground = c.ground;
  result.inferred = c.inferred;
  result.solution = c.sol;

  json artifacts = json::object();
  for (const auto& [name, content] : result.artifacts) artifacts[name] = hex64(fnv1a(content));
  json manifest{
      {"config", config},
      {"config_hash", hex64(fnv1a(config.dump()))},
      {"base_dir", fs::absolute(base_dir).lexically_normal().string()},
      {"seeds", c.seeds},
      {"inputs", c.inputs},
      {"stages", stages},
      {"artifacts", artifacts},
      {"exit_code", result.exit_code},
  };
  if (!result.error.empty()) manifest["error"] = result.error;
  result.manifest = dump(manifest);
  return result;
}

PipelineResult run_config_file(const fs::path& file, int threads) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const std::exception& e) {
    PipelineResult r;
    r.exit_code = kExitUsage;
    r.error = std::string("config: ") + e.what();
    return r;
  }
  fs::path base = file.parent_path();
  if (base.empty()) base = ".";
  if (j.contains("config_hash") && j.contains("config")) {
    // a manifest: rerun its config, refusing edited copies
    if (hex64(fnv1a(j["config"].dump())) != j["config_hash"].get<std::string>()) {
      PipelineResult r;
      r.exit_code = kExitUsage;
      r.error = "manifest: config_hash does not match its config";
      return r;
    }
    if (j.contains("base_dir")) base = j["base_dir"].get<std::string>();
    return run_pipeline(j["config"], base, threads);
  }
  return run_pipeline(j, base, threads);
}

void write_artifacts(const PipelineResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& [name, content] : result.artifacts) write_file(out_dir / name, content);
  write_file(out_dir / "manifest.json", result.manifest);
}

}  // namespace occam
