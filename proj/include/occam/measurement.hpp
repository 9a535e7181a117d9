#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "occam/topology.hpp"

namespace occam {

/// PSM(source, lt[0]) < PSM(source, lt[1]), each side an unordered
/// destination pair stored sorted.
struct PsmTriple {
  NodeId source;
  std::pair<NodeId, NodeId> lt[2];
  bool flipped = false;

  friend bool operator==(const PsmTriple& a, const PsmTriple& b) {
    return a.source == b.source && a.lt[0] == b.lt[0] && a.lt[1] == b.lt[1] && a.flipped == b.flipped;
  }
};

enum class DmKind { Relative, Absolute };

/// Relative: DM(lt[0]) < DM(lt[1]) over (source, destination) pairs.
/// Absolute: DM(lt[0]) == hops.
struct DmRecord {
  DmKind kind = DmKind::Relative;
  HostPair lt[2];
  int hops = 0;
  bool flipped = false;

  friend bool operator==(const DmRecord& a, const DmRecord& b) {
    return a.kind == b.kind && a.lt[0] == b.lt[0] && a.lt[1] == b.lt[1] && a.hops == b.hops &&
           a.flipped == b.flipped;
  }
};

struct ConstraintSet {
  std::vector<PsmTriple> psms;
  std::vector<DmRecord> dms;

  std::size_t num_flipped() const;
  /// Sorts pair members, drops exact duplicates, keeps first-seen order.
  void canonicalize();
  /// Every host named by a record.
  std::vector<NodeId> hosts() const;

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

enum class PsmSampling {
  None,
  Canonical,  // (S; T1,T2) vs (S; T2,T3), shared middle destination
  AllPairs,   // every two distinct destination pairs of one source
};
enum class DmMode { None, Relative, Absolute };

PsmSampling parse_psm_sampling(std::string_view s);
DmMode parse_dm_mode(std::string_view s);

/// Number of links shared by the paths source->t1 and source->t2.
int psm_value(const Network& net, const NodeId& source, const NodeId& t1, const NodeId& t2);
/// Number of nodes shared by the same two paths (the quantity the model rows count).
int psm_node_value(const Network& net, const NodeId& source, const NodeId& t1, const NodeId& t2);
int dm_value(const Network& net, const NodeId& source, const NodeId& dest);

/// Relations between unequal PSM values / distances; equal pairs emit nothing.
ConstraintSet derive_constraints(const Network& net, PsmSampling psm, DmMode dm);

/// Swaps the two sides of each relative record with probability p and sets
/// its flipped flag. Absolute DMs are untouched.
ConstraintSet inject_errors(const ConstraintSet& cs, double p, std::uint64_t seed);

/// Checks every record against a network. Returns descriptions of the
/// records that do not hold (flipped records are reported too).
struct RecordCheck {
  std::vector<std::string> psm_violations;       // node-count semantics
  std::vector<std::string> psm_link_violations;  // link-count semantics
  std::vector<std::string> dm_violations;
  int flipped_violations = 0;
  int unflipped_violations = 0;
};
RecordCheck check_records(const Network& net, const ConstraintSet& cs);

// ---------------------------------------------------------------------------
// Source trees from PSM orderings

enum class Order { Less, Equal, Greater, Unknown };

/// Order information over unordered destination pairs of one source.
class PsmOrder {
 public:
  PsmOrder(NodeId source, std::vector<NodeId> destinations);

  /// From exact PSM values (any strictly monotone rescaling gives the same tree).
  static PsmOrder from_values(NodeId source, const std::map<std::pair<NodeId, NodeId>, double>& values);
  /// From the PSM triples of one source. Comparisons between pairs sharing a
  /// destination that no record mentions are taken as equal when
  /// `missing_is_equal` (canonical sampling omits exactly the equal ones).
  static PsmOrder from_constraints(const ConstraintSet& cs, const NodeId& source,
                                   std::vector<NodeId> destinations, bool missing_is_equal = true);

  void add_less(std::pair<NodeId, NodeId> lo, std::pair<NodeId, NodeId> hi);
  void add_equal(std::pair<NodeId, NodeId> a, std::pair<NodeId, NodeId> b);

  Order compare(std::pair<NodeId, NodeId> a, std::pair<NodeId, NodeId> b) const;
  const NodeId& source() const { return source_; }
  const std::vector<NodeId>& destinations() const { return dests_; }

 private:
  void close() const;
  int pair_index(std::pair<NodeId, NodeId> p) const;

  NodeId source_;
  std::vector<NodeId> dests_;
  std::vector<std::pair<int, int>> less_;   // pair indices
  std::vector<std::pair<int, int>> equal_;
  bool missing_is_equal_ = false;
  mutable bool closed_ = false;
  mutable std::vector<std::vector<char>> lt_;  // transitive closure of less_
  mutable std::vector<std::vector<char>> eq_;
};

class OrderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative sibling merge: repeatedly join the most correlated pair of
/// clusters; clusters whose shared PSM equals a cluster's own join level are
/// attached to that cluster's branch point.
SourceTree build_source_tree(const PsmOrder& order);

// ---------------------------------------------------------------------------
// JSON-lines serialisation

std::string write_constraints(const ConstraintSet& cs);
ConstraintSet read_constraints(std::string_view text);

}  // namespace occam
