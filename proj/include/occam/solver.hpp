#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "occam/model.hpp"
#include "occam/rational.hpp"

namespace occam {

enum class SolveStatus {
  Optimal,
  GapFeasible,
  Infeasible,
  Timeout,  // limit reached; assignment holds the incumbent
  Unknown,  // limit reached before any feasible assignment was found
};
const char* to_string(SolveStatus s);

struct SolverConfig {
  Rational rel_gap{3, 20};
  double time_limit = 0;         // seconds, 0 = none
  std::int64_t node_limit = 0;   // 0 = none
  std::uint64_t seed = 0;        // 0 keeps id order for ties
};

struct SolveStats {
  std::int64_t nodes = 0;
  std::int64_t probes = 0;
  double wall_seconds = 0;
};

struct Solution {
  SolveStatus status = SolveStatus::Unknown;
  std::vector<std::int64_t> assignment;  // indexed by variable id
  Rational objective{0};
  Rational bound{0};
  SolveStats stats;
  bool verified = false;

  bool has_assignment() const {
    return status == SolveStatus::Optimal || status == SolveStatus::GapFeasible ||
           (status == SolveStatus::Timeout && !assignment.empty());
  }
  std::int64_t value(int var) const { return assignment.at(static_cast<std::size_t>(var)); }
};

/// Depth-first branch and bound with bound propagation on every row and on
/// the objective. Gap rule: stop improving once
/// incumbent − bound ≤ rel_gap · max(|incumbent|, 1).
Solution solve(const MipModel& model, const SolverConfig& config);

/// Row ids the assignment breaks (bounds are checked too and reported as -1).
std::vector<int> violated_rows(const MipModel& model, const std::vector<std::int64_t>& x);

/// CPLEX LP text. Variable names are the model's names.
std::string export_lp(const MipModel& model);

class SolutionError : public std::runtime_error {
 public:
  SolutionError(const std::string& what, int row = -1) : std::runtime_error(what), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

/// Reads "<name> <value>" lines ('#' comments allowed). Unlisted variables
/// take their lower bound. The result is checked against every row; a broken
/// row throws SolutionError carrying its index.
Solution import_solution(const MipModel& model, std::string_view text);
std::string write_solution(const MipModel& model, const Solution& sol);

}  // namespace occam
