#include "occam/probesim.hpp"

#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace occam {

const LinkParams& LinkModel::at(const NodeId& a, const NodeId& b) const {
  auto it = links.find(make_edge(a, b));
  return it == links.end() ? fallback : it->second;
}

void LinkModel::validate() const {
  auto check = [](const LinkParams& p, const std::string& what) {
    if (!(p.base_delay > 0)) throw std::invalid_argument(what + ": base_delay must be positive");
    if (!(p.load >= 0 && p.load < 1)) throw std::invalid_argument(what + ": load must lie in [0,1)");
  };
  check(fallback, "default");
  for (const auto& [e, p] : links) check(p, e.first + "|" + e.second);
}

LinkModel parse_link_model(std::string_view json_text) {
  auto j = nlohmann::json::parse(json_text);
  auto read = [](const nlohmann::json& o, LinkParams base) {
    if (o.contains("base_delay")) base.base_delay = o.at("base_delay").get<double>();
    if (o.contains("load")) base.load = o.at("load").get<double>();
    return base;
  };
  LinkModel lm;
  if (j.contains("default")) lm.fallback = read(j.at("default"), lm.fallback);
  if (j.contains("links"))
    for (const auto& [key, val] : j.at("links").items()) {
      auto bar = key.find('|');
      if (bar == std::string::npos) throw std::invalid_argument("link key '" + key + "' must be 'a|b'");
      lm.links[make_edge(key.substr(0, bar), key.substr(bar + 1))] = read(val, lm.fallback);
    }
  lm.validate();
  return lm;
}

std::string write_link_model(const LinkModel& lm) {
  nlohmann::json j;
  j["default"] = {{"base_delay", lm.fallback.base_delay}, {"load", lm.fallback.load}};
  j["links"] = nlohmann::json::object();
  for (const auto& [e, p] : lm.links) j["links"][e.first + "|" + e.second] = {{"base_delay", p.base_delay}, {"load", p.load}};
  return j.dump(2) + "\n";
}

LinkModel random_link_model(const Graph& g, double base_delay, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  LinkModel lm;
  lm.fallback.base_delay = base_delay;
  for (const auto& e : g.edges()) lm.links[e] = {base_delay, u(rng)};
  lm.validate();
  return lm;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) h = splitmix(h ^ c);
  return splitmix(h ^ 0xff);
}

double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < n; ++k) ma += a[k], mb += b[k];
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double s = 0;
  for (std::size_t k = 0; k < n; ++k) s += (a[k] - ma) * (b[k] - mb);
  return s / static_cast<double>(n - 1);
}

}  // namespace

ProbeReport simulate_trains(const Network& net, const LinkModel& lm, const NodeId& source,
                            const std::array<NodeId, 3>& receivers, int n_trains, std::uint64_t seed) {
  if (n_trains < 1) throw std::invalid_argument("n_trains must be positive");
  std::set<NodeId> distinct(receivers.begin(), receivers.end());
  if (distinct.size() != 3 || distinct.count(source)) throw std::invalid_argument("receivers must be three distinct non-source hosts");
  ProbeReport rep;
  rep.source = source;
  rep.receivers = receivers;
  std::array<const Path*, 3> paths{};
  for (int r = 0; r < 3; ++r) {
    auto it = net.paths.find({source, receivers[r]});
    if (it == net.paths.end()) throw std::invalid_argument("receiver " + receivers[r] + " unreachable from " + source);
    paths[r] = &it->second;
    // every router decrements the TTL once
    int ttl = kInitialTtl;
    for (std::size_t k = 1; k < it->second.size(); ++k) --ttl;
    rep.ttl_hops[{source, receivers[r]}] = kInitialTtl - ttl;
  }
  // directed links used by the train, in a fixed order
  std::map<std::pair<NodeId, NodeId>, int> link_id;
  std::vector<double> mean_q;
  for (const auto* p : paths)
    for (std::size_t k = 1; k < p->size(); ++k) {
      auto key = std::pair{(*p)[k - 1], (*p)[k]};
      if (link_id.count(key)) continue;
      link_id[key] = static_cast<int>(mean_q.size());
      const auto& lp = lm.at(key.first, key.second);
      mean_q.push_back(lp.base_delay * lp.load / (1.0 - lp.load));
    }
  std::mt19937_64 rng(seed);
  std::vector<double> q(mean_q.size());
  for (auto& d : rep.delays) d.reserve(n_trains);
  for (int t = 0; t < n_trains; ++t) {
    for (std::size_t l = 0; l < q.size(); ++l) {
      if (mean_q[l] > 0) q[l] = std::exponential_distribution<double>(1.0 / mean_q[l])(rng);
      else q[l] = 0.0;
    }
    for (int r = 0; r < 3; ++r) {
      const Path& p = *paths[r];
      double d = 0;
      for (std::size_t k = 1; k < p.size(); ++k) d += lm.at(p[k - 1], p[k]).base_delay + q[link_id[{p[k - 1], p[k]}]];
      rep.delays[r].push_back(d);
    }
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) rep.cov[a][b] = sample_cov(rep.delays[a], rep.delays[b]);
  return rep;
}

std::vector<ProbeReport> simulate_all(const Network& net, const LinkModel& lm, int n_trains, std::uint64_t seed) {
  std::vector<ProbeReport> out;
  for (const auto& s : net.hosts) {
    std::vector<NodeId> dests;
    for (const auto& h : net.hosts)
      if (h != s) dests.push_back(h);
    for (const auto& mid : dests)
      for (std::size_t a = 0; a < dests.size(); ++a)
        for (std::size_t b = a + 1; b < dests.size(); ++b) {
          if (dests[a] == mid || dests[b] == mid) continue;
          std::array<NodeId, 3> recv{dests[a], mid, dests[b]};
          std::uint64_t h = splitmix(seed);
          h = hash_string(h, s);
          for (const auto& r : recv) h = hash_string(h, r);
          out.push_back(simulate_trains(net, lm, s, recv, n_trains, h));
        }
    // two-destination sources still need their distances
    if (dests.size() < 3) {
      ProbeReport rep;
      rep.source = s;
      for (const auto& d : dests) rep.ttl_hops[{s, d}] = static_cast<int>(net.path(s, d).size()) - 1;
      out.push_back(std::move(rep));
    }
  }
  return out;
}

ProbeConstraints report_to_constraints(const std::vector<ProbeReport>& reports) {
  ProbeConstraints out;
  std::map<HostPair, int> hops;
  for (const auto& rep : reports) {
    for (const auto& [k, v] : rep.ttl_hops) hops[k] = v;
    if (rep.delays[0].empty()) continue;
    const auto& [t1, t2, t3] = rep.receivers;
    double c12 = rep.cov[0][1], c23 = rep.cov[1][2];
    PsmTriple p;
    p.source = rep.source;
    if (c12 > c23) {
      p.lt[0] = {t2, t3};
      p.lt[1] = {t1, t2};
    } else if (c23 > c12) {
      p.lt[0] = {t1, t2};
      p.lt[1] = {t2, t3};
    } else {
      ++out.ties;
      continue;
    }
    out.constraints.psms.push_back(p);
  }
  for (const auto& [k, v] : hops) {
    DmRecord d;
    d.kind = DmKind::Absolute;
    d.lt[0] = k;
    d.hops = v;
    out.constraints.dms.push_back(d);
  }
  out.constraints.canonicalize();
  return out;
}

}  // namespace occam
