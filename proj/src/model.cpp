#include "occam/model.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace occam {

const char* to_string(VarKind k) {
  switch (k) {
    case VarKind::SourceLink: return "SourceLink";
    case VarKind::DestLink: return "DestLink";
    case VarKind::Distance: return "Distance";
    case VarKind::NodeOnPath: return "NodeOnPath";
    case VarKind::LinkPresence: return "LinkPresence";
    case VarKind::LinAux: return "LinAux";
    case VarKind::SegmentLink: return "SegmentLink";
    case VarKind::BranchInd: return "BranchInd";
    case VarKind::NodeUse: return "NodeUse";
    case VarKind::Violation: return "Violation";
    case VarKind::Generic: return "Generic";
  }
  return "?";
}

int OccamIndex::node_index(const NodeId& n) const {
  auto it = std::find(nodes.begin(), nodes.end(), n);
  return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

int MipModel::add_var(std::string name, VarKind kind, std::int64_t lb, std::int64_t ub, bool integer) {
  if (lb > ub) throw std::logic_error("empty domain for " + name);
  if (!integer && (lb < 0 || ub > 1)) throw std::logic_error("binary out of range: " + name);
  vars.push_back({std::move(name), kind, lb, ub, integer});
  return static_cast<int>(vars.size()) - 1;
}

int MipModel::add_row(Row row) {
  // merge repeated variables, drop zero coefficients
  std::map<int, std::int64_t> acc;
  std::vector<int> order;
  for (const auto& t : row.terms) {
    if (!acc.count(t.var)) order.push_back(t.var);
    acc[t.var] += t.coeff;
  }
  row.terms.clear();
  for (int v : order)
    if (acc[v] != 0) row.terms.push_back({v, acc[v]});
  rows.push_back(std::move(row));
  return static_cast<int>(rows.size()) - 1;
}

std::size_t MipModel::count(VarKind k) const {
  return static_cast<std::size_t>(std::count_if(vars.begin(), vars.end(), [&](const Variable& v) { return v.kind == k; }));
}

void MipModel::validate() const {
  std::set<std::string> names;
  for (const auto& v : vars) {
    if (!names.insert(v.name).second) throw std::logic_error("duplicate variable name " + v.name);
    if (v.lb > v.ub) throw std::logic_error("empty domain for " + v.name);
    if (!v.integer && (v.lb < 0 || v.ub > 1)) throw std::logic_error("binary bound broken for " + v.name);
  }
  const int n = static_cast<int>(vars.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& t : rows[r].terms)
      if (t.var < 0 || t.var >= n) throw std::logic_error("row " + std::to_string(r) + " references unknown variable");
  for (const auto& [v, c] : objective)
    if (v < 0 || v >= n) throw std::logic_error("objective references unknown variable");
}

bool MipModel::row_holds(const Row& r, const std::vector<std::int64_t>& x) const {
  std::int64_t act = 0;
  for (const auto& t : r.terms) act += t.coeff * x[t.var];
  switch (r.sense) {
    case Sense::Le: return act <= r.rhs;
    case Sense::Ge: return act >= r.rhs;
    case Sense::Eq: return act == r.rhs;
  }
  return false;
}

Rational MipModel::evaluate(const std::vector<std::int64_t>& x) const {
  Rational f = objective_constant;
  for (const auto& [v, c] : objective) f += c * x[v];
  return f;
}

bool operator==(const MipModel& a, const MipModel& b) {
  return a.vars == b.vars && a.rows == b.rows && a.objective == b.objective &&
         a.objective_constant == b.objective_constant && a.products == b.products;
}

Linearized linearize(MipModel& model, int x, int y, std::string name) {
  const int n = static_cast<int>(model.vars.size());
  if (x < 0 || x >= n || y < 0 || y >= n) throw ModelError("linearize: unknown variable");
  if (model.vars[x].integer && model.vars[y].integer) throw ModelError("linearize: integer x integer is unsupported");
  if (!model.vars[x].integer && model.vars[y].integer) std::swap(x, y);
  const auto& vx = model.vars[x];
  Linearized out;
  if (!vx.integer) {
    out.z = model.add_binary(name, VarKind::LinAux);
    out.rows.push_back({name + "_a", {{out.z, 1}, {x, -1}}, Sense::Le, 0, RowKind::Linearization});
    out.rows.push_back({name + "_b", {{out.z, 1}, {y, -1}}, Sense::Le, 0, RowKind::Linearization});
    out.rows.push_back({name + "_c", {{out.z, 1}, {x, -1}, {y, -1}}, Sense::Ge, -1, RowKind::Linearization});
  } else {
    if (vx.lb < 0) throw ModelError("linearize: integer factor must be non-negative");
    const std::int64_t I = vx.ub;
    out.z = model.add_integer(name, 0, I, VarKind::LinAux);
    out.rows.push_back({name + "_a", {{out.z, 1}, {y, -I}}, Sense::Le, 0, RowKind::Linearization});
    out.rows.push_back({name + "_b", {{out.z, 1}, {x, -1}}, Sense::Le, 0, RowKind::Linearization});
    out.rows.push_back({name + "_c", {{out.z, 1}, {x, -1}, {y, -I}}, Sense::Ge, -I, RowKind::Linearization});
  }
  for (const auto& r : out.rows) model.add_row(r);
  model.products.push_back({out.z, x, y});
  return out;
}

Rational default_violation_weight(const Rational& alpha, int num_hosts, int num_nodes, std::int64_t distance_bound) {
  std::int64_t h2 = static_cast<std::int64_t>(num_hosts) * num_hosts;
  std::int64_t v2 = static_cast<std::int64_t>(num_nodes) * num_nodes;
  return Rational(2) * (alpha * (h2 * distance_bound) + (Rational(1) - alpha) * v2);
}

namespace {

struct Expr {
  std::vector<Term> terms;
  std::int64_t constant = 0;

  Expr& add(int var, std::int64_t c) {
    terms.push_back({var, c});
    return *this;
  }
  Expr& add(const Expr& e, std::int64_t c) {
    for (const auto& t : e.terms) terms.push_back({t.var, t.coeff * c});
    constant += e.constant * c;
    return *this;
  }
};

class Builder {
 public:
  explicit Builder(MipModel& m) : m_(m) {}

  Expr var(int x) const {
    Expr e;
    const auto& v = m_.vars[x];
    if (v.fixed()) e.constant = v.lb;
    else e.add(x, 1);
    return e;
  }

  /// Product of two variables; fixed factors simplify away, everything else
  /// goes through one shared auxiliary per pair.
  Expr product(int x, int y) {
    if (m_.vars[x].integer && !m_.vars[y].integer) std::swap(x, y);
    const auto& a = m_.vars[x];  // binary (or the binary of two)
    const auto& b = m_.vars[y];
    if ((a.fixed() && a.lb == 0) || (b.fixed() && b.lb == 0)) return {};
    if (a.fixed()) {
      Expr e = var(y);
      for (auto& t : e.terms) t.coeff *= a.lb;
      e.constant *= a.lb;
      return e;
    }
    if (b.fixed()) {
      Expr e = var(x);
      for (auto& t : e.terms) t.coeff *= b.lb;
      e.constant *= b.lb;
      return e;
    }
    auto key = b.integer ? std::pair{y, x} : std::pair{std::min(x, y), std::max(x, y)};
    auto it = cache_.find(key);
    if (it != cache_.end()) return var(it->second);
    auto lin = linearize(m_, key.first, key.second, "z_" + m_.vars[key.first].name + "_" + m_.vars[key.second].name);
    cache_[key] = lin.z;
    return var(lin.z);
  }

  void row(std::string name, const Expr& lhs, Sense sense, std::int64_t rhs, RowKind kind = RowKind::Structural,
           int record = -1) {
    Row r{std::move(name), lhs.terms, sense, rhs - lhs.constant, kind, record};
    m_.add_row(std::move(r));
  }

 private:
  MipModel& m_;
  std::map<std::pair<int, int>, int> cache_;
};

std::string nm(const char* prefix, std::initializer_list<int> idx) {
  std::string s = prefix;
  for (int i : idx) s += "_" + std::to_string(i);
  return s;
}

struct Resolved {
  std::vector<NodeId> hosts;
  int H = 0, V = 0, budget = 0;
  std::int64_t M = 0, I = 0;
};

Resolved resolve(std::vector<NodeId> hosts, const ModelConfig& config) {
  std::sort(hosts.begin(), hosts.end());
  hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());
  if (hosts.empty()) throw ModelError("empty host set");
  if (config.alpha < Rational(0) || config.alpha > Rational(1)) throw ModelError("alpha must lie in [0,1]");
  Resolved r;
  r.hosts = std::move(hosts);
  r.H = static_cast<int>(r.hosts.size());
  r.budget = config.node_budget.value_or(r.H);
  if (r.budget < 0) throw ModelError("node_budget must be non-negative");
  r.V = r.H + r.budget;
  r.M = config.big_m.value_or(r.H + 1);
  r.I = config.distance_bound.value_or(r.V - 1);
  if (r.M < r.H + 1) throw ModelError("big_m must be at least |H|+1");
  if (r.I < r.V - 1) throw ModelError("distance_bound must be at least |V|-1");
  return r;
}

int host_pos(const Resolved& r, const NodeId& h) {
  auto it = std::lower_bound(r.hosts.begin(), r.hosts.end(), h);
  if (it == r.hosts.end() || *it != h) throw ModelError("record names unknown host " + h);
  return static_cast<int>(it - r.hosts.begin());
}

std::vector<NodeId> slot_names(const std::vector<NodeId>& hosts, int budget) {
  std::set<NodeId> taken(hosts.begin(), hosts.end());
  std::string prefix = "x";
  auto clash = [&] {
    for (int k = 0; k < budget; ++k)
      if (taken.count(prefix + std::to_string(k))) return true;
    return false;
  };
  while (clash()) prefix = "_" + prefix;
  std::vector<NodeId> out = hosts;
  for (int k = 0; k < budget; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

/// Variables and rows shared by both variants. Returns the builder's model.
void build_core(MipModel& m, const Resolved& R, const ModelConfig& config) {
  const int H = R.H, V = R.V;
  auto& ix = m.index;
  ix.nodes = slot_names(R.hosts, R.budget);
  ix.num_hosts = H;
  m.big_m = R.M;

  ix.s.assign(H * V * V, -1);
  for (int S = 0; S < H; ++S)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j)
        if (i != j) ix.s[(S * V + i) * V + j] = m.add_binary(nm("s", {S, i, j}), VarKind::SourceLink);
  ix.d.assign(H * V * V, -1);
  for (int T = 0; T < H; ++T)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j)
        if (i != j) ix.d[(T * V + i) * V + j] = m.add_binary(nm("d", {T, i, j}), VarKind::DestLink);
  ix.m.assign(H * V, -1);
  for (int S = 0; S < H; ++S)
    for (int j = 0; j < V; ++j)
      ix.m[S * V + j] = m.add_integer(nm("m", {S, j}), 0, j == S ? 0 : R.I, VarKind::Distance);
  ix.v.assign(H * H * V, -1);
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T) {
      if (S == T) continue;
      for (int j = 0; j < V; ++j) {
        int id = m.add_binary(nm("v", {S, T, j}), VarKind::NodeOnPath);
        if (j == S || j == T) m.vars[id].lb = 1;
        else if (j < H) m.vars[id].ub = 0;
        ix.v[(S * H + T) * V + j] = id;
      }
    }
  ix.w.assign(V * V, -1);
  for (int i = 0; i < V; ++i)
    for (int j = i + 1; j < V; ++j) ix.w[i * V + j] = ix.w[j * V + i] = m.add_binary(nm("w", {i, j}), VarKind::LinkPresence);
  if (config.symmetry_breaking) {
    ix.u.assign(V, -1);
    for (int k = H; k < V; ++k) ix.u[k] = m.add_binary(nm("u", {k}), VarKind::NodeUse);
  }

  // objective: alpha * total path length + (1 - alpha) * links
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T)
      if (S != T && config.alpha != Rational(0)) m.objective.push_back({ix.m_var(S, T), config.alpha});
  if (config.alpha != Rational(1))
    for (int i = 0; i < V; ++i)
      for (int j = i + 1; j < V; ++j) m.objective.push_back({ix.w_var(i, j), Rational(1) - config.alpha});
}

/// Path-shape rows: one first hop, one last hop, no entering the source or
/// leaving a destination.
void boundary_rows(const MipModel& m, Builder& B, const Resolved& R) {
  const int H = R.H, V = R.V;
  const auto& ix = m.index;
  for (int S = 0; S < H; ++S) {
    Expr e;
    for (int j = 0; j < V; ++j)
      if (j != S) e.add(B.var(ix.s_var(S, S, j)), 1);
    B.row(nm("srcout", {S}), e, Sense::Eq, 1);
  }
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T) {
      if (T == S) continue;
      Expr e;
      for (int j = 0; j < V; ++j)
        if (j != T) e.add(B.var(ix.s_var(S, j, T)), 1);
      B.row(nm("dstin", {S, T}), e, Sense::Eq, 1);
    }
  for (int S = 0; S < H; ++S) {
    Expr e;
    for (int j = 0; j < V; ++j)
      if (j != S) e.add(B.var(ix.s_var(S, j, S)), 1);
    B.row(nm("srcin", {S}), e, Sense::Eq, 0);
  }
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T) {
      if (T == S) continue;
      Expr e;
      for (int j = 0; j < V; ++j)
        if (j != T) e.add(B.var(ix.s_var(S, T, j)), 1);
      B.row(nm("dstout", {S, T}), e, Sense::Eq, 0);
    }
}

void continuation_rows(const MipModel& m, Builder& B, const Resolved& R) {
  const int H = R.H, V = R.V;
  const auto& ix = m.index;
  for (int S = 0; S < H; ++S)
    for (int j = 0; j < V; ++j) {
      if (j == S) continue;
      Expr in;
      for (int i = 0; i < V; ++i)
        if (i != j) in.add(B.var(ix.s_var(S, i, j)), 1);
      for (int k = 0; k < V; ++k) {
        if (k == j) continue;
        Expr e = in;
        e.add(B.var(ix.s_var(S, j, k)), -1);
        B.row(nm("cont", {S, j, k}), e, Sense::Ge, 0);
      }
    }
}

void structural_rows(const MipModel& m, Builder& B, const Resolved& R, const ModelConfig& config) {
  const int H = R.H, V = R.V;
  const auto& ix = m.index;
  // in-degree at most one per source: links from S form a tree
  for (int S = 0; S < H; ++S)
    for (int j = 0; j < V; ++j) {
      Expr e;
      for (int i = 0; i < V; ++i)
        if (i != j) e.add(B.var(ix.s_var(S, i, j)), 1);
      B.row(nm("tree", {S, j}), e, Sense::Le, 1);
    }
  // out-degree at most one per destination
  for (int T = 0; T < H; ++T)
    for (int i = 0; i < V; ++i) {
      Expr e;
      for (int j = 0; j < V; ++j)
        if (j != i) e.add(B.var(ix.d_var(T, i, j)), 1);
      B.row(nm("fwd", {T, i}), e, Sense::Le, 1);
    }
  // hop counts
  for (int S = 0; S < H; ++S)
    for (int j = 0; j < V; ++j) {
      Expr e = B.var(ix.m_var(S, j));
      for (int i = 0; i < V; ++i) {
        if (i == j) continue;
        e.add(B.product(ix.m_var(S, i), ix.s_var(S, i, j)), -1);
        e.add(B.var(ix.s_var(S, i, j)), -1);
      }
      B.row(nm("dist", {S, j}), e, Sense::Eq, 0);
    }
  // path membership of internal nodes
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T) {
      if (S == T) continue;
      for (int i = H; i < V; ++i) {
        Expr e = B.var(ix.v_var(S, T, i));
        for (int j = 0; j < V; ++j)
          if (j != i) e.add(B.product(ix.v_var(S, T, j), ix.s_var(S, i, j)), -1);
        B.row(nm("onpath", {S, T, i}), e, Sense::Eq, 0);
      }
    }
  // d^T_ij is set exactly when some path towards T uses (i,j)
  for (int T = 0; T < H; ++T)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j) {
        if (i == j) continue;
        Expr z;
        for (int S = 0; S < H; ++S)
          if (S != T) z.add(B.product(ix.s_var(S, i, j), ix.v_var(S, T, j)), 1);
        Expr lo = z;
        lo.add(B.var(ix.d_var(T, i, j)), -R.M);
        B.row(nm("dpop_lo", {T, i, j}), lo, Sense::Ge, 1 - R.M);
        B.row(nm("dpop_hi", {T, i, j}), lo, Sense::Le, 0);
      }
  // link presence
  for (int S = 0; S < H; ++S)
    for (int i = 0; i < V; ++i)
      for (int j = i + 1; j < V; ++j) {
        Expr a = B.var(ix.w_var(i, j));
        a.add(B.var(ix.s_var(S, i, j)), -1);
        B.row(nm("wcpl", {S, i, j}), a, Sense::Ge, 0, RowKind::Coupling);
        Expr b = B.var(ix.w_var(i, j));
        b.add(B.var(ix.s_var(S, j, i)), -1);
        B.row(nm("wcpl", {S, j, i}), b, Sense::Ge, 0, RowKind::Coupling);
      }
  if (config.symmetry_breaking) {
    for (int k = H; k < V; ++k) {
      Expr sum = B.var(ix.u[k]);
      for (int j = 0; j < V; ++j) {
        if (j == k) continue;
        Expr e = B.var(ix.u[k]);
        e.add(B.var(ix.w_var(k, j)), -1);
        B.row(nm("use", {k, j}), e, Sense::Ge, 0, RowKind::Symmetry);
        sum.add(B.var(ix.w_var(k, j)), -1);
      }
      B.row(nm("usesum", {k}), sum, Sense::Le, 0, RowKind::Symmetry);
      if (k + 1 < V) {
        Expr e = B.var(ix.u[k + 1]);
        e.add(B.var(ix.u[k]), -1);
        B.row(nm("useord", {k}), e, Sense::Le, 0, RowKind::Symmetry);
      }
    }
  }
}

void dm_rows(MipModel& m, Builder& B, const Resolved& R) {
  const auto& ix = m.index;
  for (std::size_t r = 0; r < m.constraints.dms.size(); ++r) {
    const auto& dm = m.constraints.dms[r];
    auto mv = [&](const HostPair& p) {
      int S = host_pos(R, p.first), T = host_pos(R, p.second);
      if (S == T) throw ModelError("distance record between a host and itself");
      return ix.m_var(S, T);
    };
    if (dm.kind == DmKind::Relative) {
      Expr e = B.var(mv(dm.lt[0]));
      e.add(B.var(mv(dm.lt[1])), -1);
      B.row(nm("dm", {static_cast<int>(r)}), e, Sense::Le, -1, RowKind::Dm, static_cast<int>(r));
    } else {
      B.row(nm("dm", {static_cast<int>(r)}), B.var(mv(dm.lt[0])), Sense::Eq, dm.hops, RowKind::Dm,
            static_cast<int>(r));
    }
  }
}

void psm_rows(MipModel& m, Builder& B, const Resolved& R) {
  const auto& ix = m.index;
  for (std::size_t r = 0; r < m.constraints.psms.size(); ++r) {
    const auto& p = m.constraints.psms[r];
    int S = host_pos(R, p.source);
    Expr e;
    for (int side = 0; side < 2; ++side) {
      int a = host_pos(R, p.lt[side].first), b = host_pos(R, p.lt[side].second);
      if (a == S || b == S || a == b) throw ModelError("path-sharing record needs two destinations distinct from its source");
      for (int i = 0; i < R.V; ++i) e.add(B.product(ix.v_var(S, a, i), ix.v_var(S, b, i)), side == 0 ? 1 : -1);
    }
    B.row(nm("psm", {static_cast<int>(r)}), e, Sense::Le, -1, RowKind::Psm, static_cast<int>(r));
  }
}

void check_budget(const Resolved& R, const std::vector<DmRecord>& dms) {
  if (R.budget != 0) return;
  bool bad = R.H > 2;
  for (const auto& dm : dms)
    if (dm.kind == DmKind::Absolute && dm.hops != 1) bad = true;
  if (bad) throw ModelError("node_budget 0 leaves non-adjacent hosts unconnectable; the model would be infeasible");
}

MipModel finish(MipModel m, const Resolved& R, const ModelConfig& config) {
  if (config.mode == ModelMode::Soft)
    m = soften(m, config.violation_weight.value_or(default_violation_weight(config.alpha, R.H, R.V, R.I)));
  m.validate();
  return m;
}

}  // namespace

MipModel build_occam_model(const std::vector<NodeId>& hosts, const ConstraintSet& cs, const ModelConfig& config) {
  if (config.variant == ModelVariant::Stitch)
    throw ModelError("the stitch variant is built from source trees; use build_stitch_model");
  Resolved R = resolve(hosts, config);
  check_budget(R, cs.dms);
  MipModel m;
  m.constraints = cs;
  Builder B(m);
  build_core(m, R, config);
  boundary_rows(m, B, R);
  continuation_rows(m, B, R);
  structural_rows(m, B, R, config);
  dm_rows(m, B, R);
  psm_rows(m, B, R);
  return finish(std::move(m), R, config);
}

MipModel soften(const MipModel& model, const Rational& violation_weight) {
  if (violation_weight <= Rational(0)) throw ModelError("violation_weight must be positive");
  MipModel out = model;
  out.rows.clear();
  std::map<std::pair<int, int>, int> viol;  // (kind, record) -> var
  auto activity = [&](const Row& r) {
    std::int64_t lo = 0, hi = 0;
    for (const auto& t : r.terms) {
      const auto& v = model.vars[t.var];
      lo += t.coeff * (t.coeff > 0 ? v.lb : v.ub);
      hi += t.coeff * (t.coeff > 0 ? v.ub : v.lb);
    }
    return std::pair{lo, hi};
  };
  for (const auto& r : model.rows) {
    if (r.kind != RowKind::Psm && r.kind != RowKind::Dm) {
      out.rows.push_back(r);
      continue;
    }
    auto key = std::pair{static_cast<int>(r.kind), r.record};
    auto it = viol.find(key);
    if (it == viol.end()) {
      int y = out.add_binary(std::string(r.kind == RowKind::Psm ? "viol_psm_" : "viol_dm_") + std::to_string(r.record),
                             VarKind::Violation);
      out.objective.push_back({y, violation_weight});
      it = viol.emplace(key, y).first;
    }
    const int y = it->second;
    auto [lo, hi] = activity(r);
    if (r.sense == Sense::Le || r.sense == Sense::Eq) {
      Row le = r;
      le.sense = Sense::Le;
      if (r.sense == Sense::Eq) le.name += "_le";
      le.terms.push_back({y, -std::max<std::int64_t>(hi - r.rhs, 0)});
      out.rows.push_back(std::move(le));
    }
    if (r.sense == Sense::Ge || r.sense == Sense::Eq) {
      Row ge = r;
      ge.sense = Sense::Ge;
      if (r.sense == Sense::Eq) ge.name += "_ge";
      ge.terms.push_back({y, std::max<std::int64_t>(r.rhs - lo, 0)});
      out.rows.push_back(std::move(ge));
    }
  }
  return out;
}

MipModel build_stitch_model(const std::map<NodeId, SourceTree>& trees, const std::vector<DmRecord>& dms,
                            const ModelConfig& config) {
  std::vector<NodeId> hosts;
  for (const auto& [h, t] : trees) hosts.push_back(h);
  Resolved R = resolve(hosts, config);
  for (const auto& [h, t] : trees) {
    if (t.root != h) throw ModelError("source tree for " + h + " is rooted at " + t.root);
    std::set<NodeId> expect(R.hosts.begin(), R.hosts.end());
    expect.erase(h);
    if (t.leaves != expect) throw ModelError("source tree for " + h + " does not reach exactly the other hosts");
    auto problems = check_source_tree(t);
    if (!problems.empty()) throw ModelError("malformed source tree for " + h + ": " + problems.front());
  }
  check_budget(R, dms);
  const int H = R.H, V = R.V;

  MipModel m;
  m.constraints.dms = dms;
  Builder B(m);
  build_core(m, R, config);
  auto& ix = m.index;
  for (const auto& h : R.hosts) ix.trees.push_back(trees.at(h));
  ix.seg_offset.assign(H + 1, 0);
  for (int S = 0; S < H; ++S) ix.seg_offset[S + 1] = ix.seg_offset[S] + static_cast<int>(ix.trees[S].segments.size());
  ix.num_segments = ix.seg_offset[H];
  const int NS = ix.num_segments;

  ix.p.assign(NS * V * V, -1);
  for (int S = 0; S < H; ++S)
    for (const auto& seg : ix.trees[S].segments) {
      int g = ix.seg_offset[S] + seg.id;
      for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j)
          if (i != j) ix.p[(g * V + i) * V + j] = m.add_binary(nm("p", {S, seg.id, i, j}), VarKind::SegmentLink);
    }
  ix.b.assign(NS * V, -1);
  for (int S = 0; S < H; ++S)
    for (const auto& seg : ix.trees[S].segments) {
      if (seg.to.is_host) continue;
      int g = ix.seg_offset[S] + seg.id;
      auto O = static_cast<std::int64_t>(ix.trees[S].outgoing(seg.to.branch).size());
      // holds |O|·b, so the branch-point equality stays integral
      for (int j = H; j < V; ++j) ix.b[g * V + j] = m.add_integer(nm("b", {S, seg.id, j}), 0, 2 * O, VarKind::BranchInd);
    }

  boundary_rows(m, B, R);
  auto out_sum = [&](int g, int j) {
    Expr e;
    for (int k = 0; k < V; ++k)
      if (k != j) e.add(B.var(ix.p_var(g, j, k)), 1);
    return e;
  };
  for (int S = 0; S < H; ++S) {
    const auto& tree = ix.trees[S];
    for (const auto& seg : tree.segments) {
      int g = ix.seg_offset[S] + seg.id;
      if (!seg.from) B.row(nm("segroot", {S, seg.id}), out_sum(g, S), Sense::Eq, 1, RowKind::Segment);
      if (seg.to.is_host) {
        int T = host_pos(R, seg.to.host);
        Expr in;
        for (int j = 0; j < V; ++j)
          if (j != T) in.add(B.var(ix.p_var(g, j, T)), 1);
        B.row(nm("segleaf_in", {S, seg.id}), in, Sense::Eq, 1, RowKind::Segment);
        B.row(nm("segleaf_out", {S, seg.id}), out_sum(g, T), Sense::Eq, 0, RowKind::Segment);
        for (int j = 0; j < V; ++j) {
          if (j == T) continue;
          Expr out = out_sum(g, j);
          for (int i = 0; i < V; ++i) {
            if (i == j) continue;
            Expr e = out;
            e.add(B.var(ix.p_var(g, i, j)), -1);
            B.row(nm("segchain", {S, seg.id, i, j}), e, Sense::Ge, 0, RowKind::Segment);
          }
        }
      } else {
        auto O = tree.outgoing(seg.to.branch);
        const auto nO = static_cast<std::int64_t>(O.size());
        for (int j = H; j < V; ++j) {
          Expr def;
          def.add(out_sum(g, j), nO);
          for (int o : O) def.add(out_sum(ix.seg_offset[S] + o, j), 1);
          def.add(B.var(ix.b_var(g, j)), -1);
          B.row(nm("segbranch", {S, seg.id, j}), def, Sense::Eq, 0, RowKind::Segment);
          for (int i = 0; i < V; ++i) {
            if (i == j) continue;
            Expr e = B.var(ix.b_var(g, j));
            e.add(B.var(ix.p_var(g, i, j)), -nO);
            B.row(nm("segchain", {S, seg.id, i, j}), e, Sense::Ge, 0, RowKind::Segment);
          }
        }
      }
      for (int j = 0; j < V; ++j) B.row(nm("segone", {S, seg.id, j}), out_sum(g, j), Sense::Le, 1, RowKind::Segment);
    }
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j) {
        if (i == j) continue;
        Expr e;
        for (const auto& seg : tree.segments) e.add(B.var(ix.p_var(ix.seg_offset[S] + seg.id, i, j)), 1);
        e.add(B.var(ix.s_var(S, i, j)), -1);
        B.row(nm("segcpl", {S, i, j}), e, Sense::Eq, 0, RowKind::Segment);
      }
  }
  // redundant for encoded networks; prunes links that dangle off the paths
  continuation_rows(m, B, R);
  structural_rows(m, B, R, config);
  dm_rows(m, B, R);
  return finish(std::move(m), R, config);
}

// ---------------------------------------------------------------------------

namespace {

/// Node of `net` where the paths from the tree root to all leaves below
/// `branch` diverge.
NodeId branch_node(const Network& net, const SourceTree& t, int branch) {
  std::vector<NodeId> leaves;
  std::function<void(int)> collect = [&](int b) {
    for (int s : t.outgoing(b)) {
      const auto& to = t.segments[s].to;
      if (to.is_host) leaves.push_back(to.host);
      else collect(to.branch);
    }
  };
  collect(branch);
  if (leaves.empty()) return t.root;
  Path common = net.path(t.root, leaves.front());
  for (const auto& l : leaves) {
    const auto& p = net.path(t.root, l);
    std::size_t k = 0;
    while (k < common.size() && k < p.size() && common[k] == p[k]) ++k;
    common.resize(k);
  }
  return common.empty() ? t.root : common.back();
}

}  // namespace

std::optional<std::vector<std::int64_t>> encode_network(const MipModel& model, const Network& net) {
  const auto& ix = model.index;
  const int H = ix.H(), V = ix.V();
  std::vector<NodeId> hosts(ix.nodes.begin(), ix.nodes.begin() + H);
  if (hosts != net.hosts) throw ModelError("network hosts differ from the model's hosts");
  std::map<NodeId, int> deg;
  for (const auto& [a, b] : net.graph.edges()) ++deg[a], ++deg[b];
  std::vector<NodeId> internal;
  for (const auto& n : net.graph.nodes())
    if (!net.is_host(n)) internal.push_back(n);
  std::stable_sort(internal.begin(), internal.end(), [&](const NodeId& a, const NodeId& b) {
    return (deg[a] > 0) > (deg[b] > 0);
  });
  if (static_cast<int>(internal.size()) > V - H) return std::nullopt;
  std::map<NodeId, int> pos;
  for (int h = 0; h < H; ++h) pos[hosts[h]] = h;
  for (std::size_t k = 0; k < internal.size(); ++k) pos[internal[k]] = H + static_cast<int>(k);

  std::vector<std::int64_t> x(model.vars.size(), 0);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = model.vars[k].lb;
  auto set = [&](int var, std::int64_t val) {
    if (var >= 0) x[var] = val;
  };
  for (int S = 0; S < H; ++S)
    for (int T = 0; T < H; ++T) {
      if (S == T) continue;
      const auto& p = net.path(hosts[S], hosts[T]);
      for (std::size_t k = 0; k < p.size(); ++k) {
        int a = pos.at(p[k]);
        set(ix.v_var(S, T, a), 1);
        set(ix.m_var(S, a), static_cast<std::int64_t>(k));
        if (k + 1 < p.size()) {
          int b = pos.at(p[k + 1]);
          set(ix.s_var(S, a, b), 1);
          set(ix.d_var(T, a, b), 1);
        }
      }
    }
  for (const auto& [a, b] : net.graph.edges()) set(ix.w_var(pos.at(a), pos.at(b)), 1);
  if (!ix.u.empty())
    for (int k = H; k < V; ++k) {
      bool used = false;
      for (int j = 0; j < V; ++j)
        if (j != k && x[ix.w_var(k, j)]) used = true;
      set(ix.u[k], used ? 1 : 0);
    }
  if (ix.num_segments > 0) {
    for (int S = 0; S < H; ++S) {
      const auto& t = ix.trees[S];
      auto end_node = [&](const SegmentEnd& e) { return e.is_host ? e.host : branch_node(net, t, e.branch); };
      for (const auto& seg : t.segments) {
        int g = ix.seg_offset[S] + seg.id;
        NodeId start = seg.from ? branch_node(net, t, *seg.from) : t.root;
        NodeId stop = end_node(seg.to);
        // any leaf below the segment carries its links on its path
        NodeId leaf;
        for (SegmentEnd e = seg.to; leaf.empty();) {
          if (e.is_host) leaf = e.host;
          else e = t.segments[t.outgoing(e.branch).front()].to;
        }
        const auto& p = net.path(t.root, leaf);
        auto a = std::find(p.begin(), p.end(), start), b = std::find(p.begin(), p.end(), stop);
        for (auto it = a; it != p.end() && it < b; ++it) set(ix.p_var(g, pos.at(*it), pos.at(*(it + 1))), 1);
      }
      for (const auto& seg : t.segments) {
        if (seg.to.is_host) continue;
        int g = ix.seg_offset[S] + seg.id;
        auto O = t.outgoing(seg.to.branch);
        for (int j = H; j < V; ++j) {
          std::int64_t val = 0;
          for (int k = 0; k < V; ++k) {
            if (k == j) continue;
            val += static_cast<std::int64_t>(O.size()) * x[ix.p_var(g, j, k)];
            for (int o : O) val += x[ix.p_var(ix.seg_offset[S] + o, j, k)];
          }
          set(ix.b_var(g, j), val);
        }
      }
    }
  }
  for (const auto& pr : model.products) x[pr.z] = x[pr.x] * x[pr.y];
  return x;
}

}  // namespace occam
