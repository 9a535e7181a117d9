#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "occam/evaluate.hpp"
#include "occam/measurement.hpp"
#include "occam/model.hpp"
#include "occam/reconstruct.hpp"
#include "occam/solver.hpp"
#include "occam/topology.hpp"

namespace occam {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitTimeout = 4,
  kExitVerification = 5,
};

/// A failed stage; `code` is the process exit code it maps to.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause, int code = kExitOther)
      : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)), code_(code) {}
  const std::string& stage() const { return stage_; }
  int code() const { return code_; }

 private:
  std::string stage_;
  int code_;
};

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t h);
/// Independent per-purpose seed derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose);

/// Accepts a JSON string ("1/5", "0.2") or number.
Rational rational_from_json(const nlohmann::json& j);
/// Keys: alpha, node_budget, big_m, distance_bound, mode (hard|soft),
/// violation_weight, variant (standard|stitch), symmetry_breaking.
ModelConfig model_config_from_json(const nlohmann::json& j);
/// Keys: rel_gap, time_limit, node_limit, seed.
SolverConfig solver_config_from_json(const nlohmann::json& j);

/// {"kind": "tree", "hosts": n|[lo,hi], "max_nodes": n} or
/// {"kind": "graph", "routers": n|[lo,hi], "extra_edges": n|[lo,hi], "hosts": n|[lo,hi]}.
/// Range parameters are drawn from the seed, then the routes are computed.
Network generate_network(const nlohmann::json& spec, std::uint64_t seed);

/// Source trees for the stitch variant: either each host's logical tree in
/// the ground truth or the tree built from the PSM orderings.
std::map<NodeId, SourceTree> trees_from_network(const Network& net);
std::map<NodeId, SourceTree> trees_from_psms(const ConstraintSet& cs, const std::vector<NodeId>& hosts);

struct PipelineResult {
  std::map<std::string, std::string> artifacts;  // file name -> content
  std::string manifest;                            // manifest.json content
  int exit_code = kExitOk;
  std::string error;
  std::optional<Network> ground;
  std::optional<Network> inferred;
  std::optional<Solution> solution;
  std::optional<EvalReport> eval;
  std::optional<VerificationReport> verification;
  std::vector<std::string> log;  // wall-clock and other run-dependent notes
};

/// Runs the config's stage list. Relative input paths resolve against
/// `base_dir`. `threads` only spreads independent sweep runs.
PipelineResult run_pipeline(const nlohmann::json& config, const std::filesystem::path& base_dir, int threads = 1);
/// Accepts either a config or a manifest written by an earlier run.
PipelineResult run_config_file(const std::filesystem::path& file, int threads = 1);
void write_artifacts(const PipelineResult& result, const std::filesystem::path& out_dir);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

}  // namespace occam
