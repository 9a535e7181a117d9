#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "occam/measurement.hpp"
#include "occam/topology.hpp"

namespace occam {

struct LinkParams {
  double base_delay = 1.0;
  double load = 0.0;  // background utilisation in [0,1)
  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

struct LinkModel {
  LinkParams fallback;
  std::map<Edge, LinkParams> links;

  const LinkParams& at(const NodeId& a, const NodeId& b) const;
  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
  friend bool operator==(const LinkModel&, const LinkModel&) = default;
};

/// {"default": {"base_delay": d, "load": l}, "links": {"a|b": {...}, ...}}
LinkModel parse_link_model(std::string_view json_text);
std::string write_link_model(const LinkModel& lm);
/// Every edge of `g` gets its own load drawn uniformly from [lo, hi].
LinkModel random_link_model(const Graph& g, double base_delay, double lo, double hi, std::uint64_t seed);

struct ProbeReport {
  NodeId source;
  std::array<NodeId, 3> receivers;
  std::array<std::vector<double>, 3> delays;  // per receiver, one entry per train
  std::array<std::array<double, 3>, 3> cov{};
  std::map<HostPair, int> ttl_hops;
};

inline constexpr int kInitialTtl = 255;

/// Sends `n_trains` three-packet trains from `source`, one packet per
/// receiver. Each directed link draws one exponential queueing delay per
/// train (mean base·load/(1−load)) that every packet of the train crossing it
/// experiences.
ProbeReport simulate_trains(const Network& net, const LinkModel& lm, const NodeId& source,
                            const std::array<NodeId, 3>& receivers, int n_trains, std::uint64_t seed);

/// Every canonical triple (S; T1,T2 | T2,T3) of the network, each with its
/// own RNG stream derived from `seed`.
std::vector<ProbeReport> simulate_all(const Network& net, const LinkModel& lm, int n_trains, std::uint64_t seed);

struct ProbeConstraints {
  ConstraintSet constraints;
  int ties = 0;  // equal covariances, no PSM emitted
};
/// C(S;T1,T2) > C(S;T2,T3) becomes PSM(S;T2,T3) < PSM(S;T1,T2), and the
/// reverse; TTL hop counts become absolute DMs.
ProbeConstraints report_to_constraints(const std::vector<ProbeReport>& reports);

}  // namespace occam
