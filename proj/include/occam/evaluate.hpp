#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "occam/topology.hpp"

namespace occam {

/// Injective partial map from ground-truth nodes to inferred nodes. Hosts
/// always map to themselves.
struct NodeMapping {
  std::map<NodeId, NodeId> pairs;
  friend bool operator==(const NodeMapping&, const NodeMapping&) = default;
};

struct NsResult {
  double ns = 0;  // percentage
  int matched = 0;
  int union_size = 0;
  NodeMapping mapping;
  bool certified = true;  // false when the heuristic search was used
};

/// Largest internal-node count per side searched exhaustively.
inline constexpr int kExactMappingLimit = 10;

/// Maximises 100·matched / (|E| + |E'| − matched) over injective mappings
/// with hosts fixed.
NsResult ns_score(const Graph& ground, const Graph& inferred, const std::vector<NodeId>& hosts);

int levenshtein(const std::vector<NodeId>& a, const std::vector<NodeId>& b);

struct PedResult {
  double mean = 0;
  std::map<HostPair, int> per_pair;
};
/// Ground paths are rewritten through the mapping (unmapped nodes match
/// nothing) and compared with the inferred paths.
PedResult ped(const std::map<HostPair, Path>& ground, const std::map<HostPair, Path>& inferred,
              const NodeMapping& mapping);

struct EvalReport {
  double ns = 0;
  int matched = 0;
  int union_size = 0;
  NodeMapping mapping;
  std::map<HostPair, int> per_path_ped;
  double ped = 0;
  std::vector<std::pair<NodeId, NodeId>> collapsed_pairs;
  bool certified = true;

  nlohmann::json to_json() const;
};

EvalReport evaluate(const Network& ground, const Network& inferred);

/// Best score over all ways of contracting up to `max_pairs` adjacent
/// internal-node pairs of the ground truth (ties go to the lower PED).
EvalReport collapse_search(const Network& ground, const Network& inferred, int max_pairs);

/// Contracts the edge (keep, drop) of a network; paths are rewritten.
Network contract(const Network& net, const NodeId& keep, const NodeId& drop);

std::string eval_csv_header();
std::string eval_csv_row(const std::string& label, const EvalReport& r);

}  // namespace occam
