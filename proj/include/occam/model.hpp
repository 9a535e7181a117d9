#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "occam/measurement.hpp"
#include "occam/rational.hpp"
#include "occam/topology.hpp"

namespace occam {

enum class VarKind {
  SourceLink,    // s^S_ij
  DestLink,      // d^T_ij
  Distance,      // m^S_j
  NodeOnPath,    // v^{S,T}_j
  LinkPresence,  // w_ij
  LinAux,        // product replacement
  SegmentLink,   // p^s_ij
  BranchInd,     // b^s_j
  NodeUse,       // symmetry breaking
  Violation,     // soft rows
  Generic,
};
const char* to_string(VarKind k);

struct Variable {
  std::string name;
  VarKind kind = VarKind::Generic;
  std::int64_t lb = 0;
  std::int64_t ub = 1;
  bool integer = false;  // false: binary

  bool fixed() const { return lb == ub; }
  friend bool operator==(const Variable&, const Variable&) = default;
};

enum class Sense { Le, Eq, Ge };

struct Term {
  int var;
  std::int64_t coeff;
  friend bool operator==(const Term&, const Term&) = default;
};

enum class RowKind { Structural, Psm, Dm, Linearization, Coupling, Symmetry, Segment };

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::Le;
  std::int64_t rhs = 0;
  RowKind kind = RowKind::Structural;
  int record = -1;  // index into the PSM or DM list for Psm/Dm rows

  friend bool operator==(const Row&, const Row&) = default;
};

/// z = x·y, recorded so assignments can be completed from the base variables.
struct Product {
  int z, x, y;
  friend bool operator==(const Product&, const Product&) = default;
};

/// Lookup tables from model indices to variable ids (-1 when absent).
/// Node indices: hosts first (sorted), then anonymous internal nodes.
struct OccamIndex {
  std::vector<NodeId> nodes;
  int num_hosts = 0;
  std::vector<int> s, d, m, v, w, u;
  // stitch variant: p[seg_offset[S] + seg][i][j], b[...][j]
  std::vector<int> p, b;
  std::vector<int> seg_offset;
  int num_segments = 0;
  std::vector<SourceTree> trees;

  int V() const { return static_cast<int>(nodes.size()); }
  int H() const { return num_hosts; }
  int s_var(int S, int i, int j) const { return s[(S * V() + i) * V() + j]; }
  int d_var(int T, int i, int j) const { return d[(T * V() + i) * V() + j]; }
  int m_var(int S, int j) const { return m[S * V() + j]; }
  int v_var(int S, int T, int j) const { return v[(S * H() + T) * V() + j]; }
  int w_var(int i, int j) const { return w[i * V() + j]; }
  int p_var(int gseg, int i, int j) const { return p[(gseg * V() + i) * V() + j]; }
  int b_var(int gseg, int j) const { return b[gseg * V() + j]; }
  int node_index(const NodeId& n) const;
};

struct MipModel {
  std::vector<Variable> vars;
  std::vector<Row> rows;
  std::vector<std::pair<int, Rational>> objective;
  Rational objective_constant{0};
  std::vector<Product> products;
  OccamIndex index;
  ConstraintSet constraints;  // records the Psm/Dm rows refer to
  std::int64_t big_m = 0;

  int add_var(std::string name, VarKind kind, std::int64_t lb, std::int64_t ub, bool integer);
  int add_binary(std::string name, VarKind kind = VarKind::Generic) {
    return add_var(std::move(name), kind, 0, 1, false);
  }
  int add_integer(std::string name, std::int64_t lb, std::int64_t ub, VarKind kind = VarKind::Generic) {
    return add_var(std::move(name), kind, lb, ub, true);
  }
  int add_row(Row row);

  std::size_t count(VarKind k) const;
  /// Throws std::logic_error naming the first broken invariant.
  void validate() const;
  bool row_holds(const Row& r, const std::vector<std::int64_t>& x) const;
  Rational evaluate(const std::vector<std::int64_t>& x) const;

  friend bool operator==(const MipModel& a, const MipModel& b);
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelMode { Hard, Soft };
enum class ModelVariant { Standard, Stitch };

struct ModelConfig {
  Rational alpha{1, 5};
  std::optional<int> node_budget;            // default |H|
  std::optional<std::int64_t> big_m;         // default |H| + 1
  std::optional<std::int64_t> distance_bound;  // default |V| - 1
  ModelMode mode = ModelMode::Hard;
  std::optional<Rational> violation_weight;  // default 2(α|H|²I + (1−α)|V|²)
  ModelVariant variant = ModelVariant::Standard;
  bool symmetry_breaking = true;
};

MipModel build_occam_model(const std::vector<NodeId>& hosts, const ConstraintSet& cs, const ModelConfig& config);

/// Adds one binary violation variable per Psm/Dm record; equality rows are
/// split in two that share it. Each row is relaxed by its own big constant
/// (the distance from rhs to the row's worst activity).
MipModel soften(const MipModel& model, const Rational& violation_weight);

/// z = x·y for binary x,y, or integer x in [0,I] times binary y.
struct Linearized {
  int z;
  std::vector<Row> rows;
};
Linearized linearize(MipModel& model, int x, int y, std::string name);

MipModel build_stitch_model(const std::map<NodeId, SourceTree>& trees, const std::vector<DmRecord>& dms,
                            const ModelConfig& config);

/// Resolved defaults for a host count.
Rational default_violation_weight(const Rational& alpha, int num_hosts, int num_nodes, std::int64_t distance_bound);

/// Encodes a ground-truth network as a model assignment. Internal nodes of
/// `net` are assigned to anonymous slots in sorted order. Returns nullopt
/// when the network has more internal nodes than the model has slots.
std::optional<std::vector<std::int64_t>> encode_network(const MipModel& model, const Network& net);

}  // namespace occam
