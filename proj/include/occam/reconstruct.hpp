#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "occam/measurement.hpp"
#include "occam/model.hpp"
#include "occam/solver.hpp"
#include "occam/topology.hpp"

namespace occam {

class ReconstructError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Walks each path backwards from its destination along the unique
/// predecessor with s^S_{i,prev} = 1. Internal nodes keep the model's slot
/// names; only nodes that lie on some path appear in the result.
Network graph_construct_1(const MipModel& model, const Solution& sol);

/// Stitch variant: per source, the union of its segment links, then the
/// lexicographically smallest shortest path to each destination inside it.
Network graph_construct_2(const MipModel& model, const Solution& sol);

struct VerificationReport {
  bool paths_ok = true;   // one simple path per ordered host pair
  bool psm_ok = true;     // unflipped PSM relations, node-count semantics
  bool dm_ok = true;      // unflipped DM relations
  bool trees_ok = true;   // per-source link sets form trees
  bool stitch_ok = true;  // stitch mode only
  std::vector<std::string> path_violations;
  std::vector<std::string> psm_violations;
  std::vector<std::string> psm_link_violations;  // diagnostic only
  std::vector<std::string> dm_violations;
  std::vector<std::string> tree_violations;
  std::vector<std::string> stitch_violations;
  int flipped_violations = 0;
  int unflipped_violations = 0;

  /// Every relation violated, flipped or not.
  int relation_violations() const { return flipped_violations + unflipped_violations; }
  bool ok() const { return paths_ok && psm_ok && dm_ok && trees_ok && stitch_ok; }
  nlohmann::json to_json() const;
};

VerificationReport verify_solution(const Network& net, const ConstraintSet& cs);
/// Adds the stitch checks: each source's logical tree must be isomorphic to
/// the given one.
VerificationReport verify_stitch(const Network& net, const std::map<NodeId, SourceTree>& trees,
                                 const std::vector<DmRecord>& dms);

/// Recomputes hop counts and path membership from the network and compares
/// them with the solution's m and v values. Empty when they agree.
std::vector<std::string> check_distance_and_membership(const MipModel& model, const Solution& sol, const Network& net);

}  // namespace occam
