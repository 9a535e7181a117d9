#include "occam/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace occam {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapFeasible: return "gap-feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::Unknown: return "unknown";
  }
  return "?";
}

std::vector<int> violated_rows(const MipModel& model, const std::vector<std::int64_t>& x) {
  std::vector<int> bad;
  if (x.size() != model.vars.size()) return {-1};
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < model.vars[j].lb || x[j] > model.vars[j].ub) {
      bad.push_back(-1);
      break;
    }
  for (std::size_t r = 0; r < model.rows.size(); ++r)
    if (!model.row_holds(model.rows[r], x)) bad.push_back(static_cast<int>(r));
  return bad;
}

namespace {

constexpr std::int64_t kInf = std::int64_t{1} << 60;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Engine {
 public:
  Engine(const MipModel& model, const SolverConfig& cfg) : model_(model), cfg_(cfg) {
    n_ = static_cast<int>(model.vars.size());
    lb_.resize(n_);
    ub_.resize(n_);
    is_int_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = model.vars[j].lb;
      ub_[j] = model.vars[j].ub;
      is_int_[j] = model.vars[j].integer;
    }
    // integral objective: scale every coefficient by the lcm of denominators
    scale_ = model.objective_constant.denominator();
    for (const auto& [v, c] : model.objective) scale_ = std::lcm(scale_, c.denominator());
    obj_coef_.assign(n_, 0);
    for (const auto& [v, c] : model.objective) obj_coef_[v] += c.numerator() * (scale_ / c.denominator());
    obj_const_ = model.objective_constant.numerator() * (scale_ / model.objective_constant.denominator());

    const int R = static_cast<int>(model.rows.size());
    row_start_.push_back(0);
    for (const auto& r : model.rows) {
      for (const auto& t : r.terms) {
        row_var_.push_back(t.var);
        row_coef_.push_back(t.coeff);
      }
      row_start_.push_back(static_cast<int>(row_var_.size()));
      lo_.push_back(r.sense == Sense::Le ? -kInf : r.rhs);
      hi_.push_back(r.sense == Sense::Ge ? kInf : r.rhs);
    }
    obj_row_ = R;
    for (int j = 0; j < n_; ++j)
      if (obj_coef_[j] != 0) {
        row_var_.push_back(j);
        row_coef_.push_back(obj_coef_[j]);
      }
    row_start_.push_back(static_cast<int>(row_var_.size()));
    lo_.push_back(-kInf);
    hi_.push_back(kInf);
    nrows_ = R + 1;

    std::vector<int> deg(n_, 0);
    for (int v : row_var_) ++deg[v];
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + deg[j];
    col_row_.resize(row_var_.size());
    col_coef_.resize(row_var_.size());
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int r = 0; r < nrows_; ++r)
      for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) {
        int j = row_var_[k];
        col_row_[fill[j]] = r;
        col_coef_[fill[j]++] = row_coef_[k];
      }

    min_act_.assign(nrows_, 0);
    max_act_.assign(nrows_, 0);
    max_range_.assign(nrows_, 0);
    free_pos_bin_.assign(nrows_, 0);
    free_pos_int_.assign(nrows_, 0);
    free_neg_.assign(nrows_, 0);
    in_queue_.assign(nrows_, 0);
    for (int r = 0; r < nrows_; ++r) {
      for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) {
        int j = row_var_[k];
        std::int64_t a = row_coef_[k];
        min_act_[r] += a > 0 ? a * lb_[j] : a * ub_[j];
        max_act_[r] += a > 0 ? a * ub_[j] : a * lb_[j];
        max_range_[r] = std::max(max_range_[r], (a > 0 ? a : -a) * (ub_[j] - lb_[j]));
        if (lb_[j] != ub_[j]) count_free(r, j, a, +1);
      }
      if (r < obj_row_ && lo_[r] > -kInf) {
        bool has_pos_bin = false;
        for (int k = row_start_[r]; k < row_start_[r + 1]; ++k)
          if (row_coef_[k] > 0 && !is_int_[row_var_[k]]) has_pos_bin = true;
        if (has_pos_bin) choice_rows_.push_back(r);
      }
      queue_.push_back(r);
      in_queue_[r] = 1;
    }
    for (int j = 0; j < n_; ++j)
      if (lb_[j] == ub_[j]) ++nfixed_;
    start_ = std::chrono::steady_clock::now();
  }

  /// Objective lower bound after root propagation; nullopt if infeasible there.
  std::optional<std::int64_t> root_only() {
    if (!propagate()) return std::nullopt;
    return min_act_[obj_row_] + obj_const_;
  }
  std::int64_t scale() const { return scale_; }

  Solution run() {
    Solution sol;
    bool root_ok = propagate();
    root_bound_ = min_act_[obj_row_] + obj_const_;
    if (root_ok) search();
    sol.stats.nodes = nodes_;
    sol.stats.probes = probes_;
    sol.stats.wall_seconds = elapsed();
    const bool have = !incumbent_.empty();
    if (have) {
      sol.assignment = incumbent_;
      sol.objective = Rational(inc_value_, scale_);
    }
    if (!limit_hit_) {
      if (!have) {
        sol.status = SolveStatus::Infeasible;
      } else {
        std::int64_t b = std::min(inc_value_, cutoff_ + 1 + obj_const_);
        sol.bound = Rational(b, scale_);
        sol.status = b >= inc_value_ ? SolveStatus::Optimal : SolveStatus::GapFeasible;
      }
    } else {
      sol.status = have ? SolveStatus::Timeout : SolveStatus::Unknown;
      sol.bound = Rational(std::min(root_bound_, have ? inc_value_ : root_bound_), scale_);
    }
    if (have) sol.verified = violated_rows(model_, sol.assignment).empty();
    return sol;
  }

 private:
  struct TrailEntry {
    int var;
    std::int64_t lb, ub;
  };
  struct Frame {
    std::size_t mark;
    int var;
    std::int64_t alt_lb, alt_ub;
    bool alt_done;
  };

  void count_free(int r, int j, std::int64_t a, int delta) {
    if (a < 0) free_neg_[r] += delta;
    else if (is_int_[j]) free_pos_int_[r] += delta;
    else free_pos_bin_[r] += delta;
  }

  void enqueue_if_useful(int r) {
    if (in_queue_[r]) return;
    bool useful = (hi_[r] < kInf && hi_[r] - min_act_[r] < max_range_[r]) ||
                  (lo_[r] > -kInf && max_act_[r] - lo_[r] < max_range_[r]);
    if (!useful) return;
    in_queue_[r] = 1;
    queue_.push_back(r);
  }

  /// Moves var j to [nlb, nub] (already intersected); false on empty domain.
  bool set_bounds(int j, std::int64_t nlb, std::int64_t nub) {
    nlb = std::max(nlb, lb_[j]);
    nub = std::min(nub, ub_[j]);
    if (nlb > nub) return false;
    if (nlb == lb_[j] && nub == ub_[j]) return true;
    trail_.push_back({j, lb_[j], ub_[j]});
    const std::int64_t dl = nlb - lb_[j], du = nub - ub_[j];
    const bool becomes_fixed = nlb == nub;
    lb_[j] = nlb;
    ub_[j] = nub;
    if (becomes_fixed) ++nfixed_;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      int r = col_row_[k];
      std::int64_t a = col_coef_[k];
      if (a > 0) {
        min_act_[r] += a * dl;
        max_act_[r] += a * du;
      } else {
        min_act_[r] += a * du;
        max_act_[r] += a * dl;
      }
      if (becomes_fixed) count_free(r, j, a, -1);
      enqueue_if_useful(r);
    }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      auto e = trail_.back();
      trail_.pop_back();
      int j = e.var;
      const bool was_fixed = lb_[j] == ub_[j];
      const std::int64_t dl = e.lb - lb_[j], du = e.ub - ub_[j];
      lb_[j] = e.lb;
      ub_[j] = e.ub;
      const bool unfixes = was_fixed && e.lb != e.ub;
      if (unfixes) --nfixed_;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        int r = col_row_[k];
        std::int64_t a = col_coef_[k];
        if (a > 0) {
          min_act_[r] += a * dl;
          max_act_[r] += a * du;
        } else {
          min_act_[r] += a * du;
          max_act_[r] += a * dl;
        }
        if (unfixes) count_free(r, j, a, +1);
      }
    }
  }

  void clear_queue() {
    for (int r : queue_) in_queue_[r] = 0;
    queue_.clear();
    qhead_ = 0;
  }

  bool propagate_row(int r) {
    if (min_act_[r] > hi_[r] || max_act_[r] < lo_[r]) return false;
    const std::int64_t slack_hi = hi_[r] < kInf ? hi_[r] - min_act_[r] : kInf;
    const std::int64_t slack_lo = lo_[r] > -kInf ? max_act_[r] - lo_[r] : kInf;
    if (slack_hi >= max_range_[r] && slack_lo >= max_range_[r]) return true;
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      const int j = row_var_[k];
      if (lb_[j] == ub_[j]) continue;
      const std::int64_t a = row_coef_[k];
      const std::int64_t range = ub_[j] - lb_[j];
      if (a > 0) {
        if (slack_hi < kInf && a * range > slack_hi && !set_bounds(j, lb_[j], lb_[j] + slack_hi / a)) return false;
        if (slack_lo < kInf && a * (ub_[j] - lb_[j]) > slack_lo && !set_bounds(j, ub_[j] - slack_lo / a, ub_[j]))
          return false;
      } else {
        const std::int64_t b = -a;
        if (slack_hi < kInf && b * range > slack_hi && !set_bounds(j, ub_[j] - slack_hi / b, ub_[j])) return false;
        if (slack_lo < kInf && b * (ub_[j] - lb_[j]) > slack_lo && !set_bounds(j, lb_[j], lb_[j] + slack_lo / b))
          return false;
      }
    }
    return true;
  }

  bool propagate() {
    while (qhead_ < queue_.size()) {
      int r = queue_[qhead_++];
      in_queue_[r] = 0;
      if (!propagate_row(r)) {
        clear_queue();
        return false;
      }
      if (qhead_ > 4096 && qhead_ * 2 > queue_.size()) {
        queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(qhead_));
        qhead_ = 0;
      }
    }
    clear_queue();
    return true;
  }

  void touch_objective() {
    if (!in_queue_[obj_row_]) {
      in_queue_[obj_row_] = 1;
      queue_.push_back(obj_row_);
    }
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool out_of_budget() {
    if (cfg_.node_limit > 0 && nodes_ >= cfg_.node_limit) return true;
    if (cfg_.time_limit > 0 && (nodes_ & 63) == 0 && elapsed() > cfg_.time_limit) return true;
    return false;
  }

  void record_incumbent() {
    std::int64_t f = min_act_[obj_row_] + obj_const_;
    if (!incumbent_.empty() && f >= inc_value_) return;
    incumbent_ = lb_;
    inc_value_ = f;
    // prune nodes that cannot beat f by more than the allowed gap
    const Rational base = std::max(Rational(f < 0 ? -f : f), Rational(scale_));
    const Rational allowed = cfg_.rel_gap * base;
    const Rational target = Rational(f) - allowed;
    std::int64_t c = ceil_div(target.numerator(), target.denominator()) - 1;
    cutoff_ = std::min(cutoff_, c - obj_const_);
    hi_[obj_row_] = cutoff_;
  }

  std::uint64_t tie_key(int j) const { return cfg_.seed == 0 ? static_cast<std::uint64_t>(j) : mix(cfg_.seed ^ mix(j)); }

  enum class Step { Branch, Repropagate, Conflict };

  /// Picks a branching decision; may instead fix failed literals.
  Step choose(int& var, std::int64_t& first_lb, std::int64_t& first_ub, std::int64_t& alt_lb, std::int64_t& alt_ub) {
    int best = -1, best_cnt = std::numeric_limits<int>::max();
    for (int r : choice_rows_) {
      if (min_act_[r] >= lo_[r] || free_neg_[r] != 0 || free_pos_int_[r] != 0) continue;
      if (free_pos_bin_[r] < best_cnt) {
        best_cnt = free_pos_bin_[r];
        best = r;
        if (best_cnt <= 2) break;
      }
    }
    if (best >= 0) {
      std::vector<int> cands;
      for (int k = row_start_[best]; k < row_start_[best + 1]; ++k) {
        int j = row_var_[k];
        if (row_coef_[k] > 0 && lb_[j] != ub_[j]) cands.push_back(j);
      }
      std::vector<int> failed;
      int pick = -1;
      std::int64_t pick_bound = kInf;
      std::uint64_t pick_key = 0;
      const bool probe = cands.size() <= 16;
      for (int j : cands) {
        std::int64_t bnd;
        if (probe) {
          ++probes_;
          std::size_t mark = trail_.size();
          bool ok = set_bounds(j, 1, 1) && propagate();
          bnd = min_act_[obj_row_];
          clear_queue();
          undo(mark);
          if (!ok) {
            failed.push_back(j);
            continue;
          }
        } else {
          bnd = min_act_[obj_row_] + std::max<std::int64_t>(obj_coef_[j], 0);
        }
        std::uint64_t key = tie_key(j);
        if (pick < 0 || bnd < pick_bound || (bnd == pick_bound && key < pick_key)) {
          pick = j;
          pick_bound = bnd;
          pick_key = key;
        }
      }
      if (!failed.empty()) {
        for (int j : failed)
          if (!set_bounds(j, 0, 0)) return Step::Conflict;
        return Step::Repropagate;
      }
      var = pick;
      first_lb = first_ub = 1;
      alt_lb = alt_ub = 0;
      return Step::Branch;
    }
    for (int j = 0; j < n_; ++j) {
      if (lb_[j] == ub_[j]) continue;
      var = j;
      if (!is_int_[j]) {
        bool one_first = obj_coef_[j] < 0;
        first_lb = first_ub = one_first ? 1 : 0;
        alt_lb = alt_ub = one_first ? 0 : 1;
      } else {
        std::int64_t mid = lb_[j] + (ub_[j] - lb_[j]) / 2;
        if (obj_coef_[j] >= 0) {
          first_lb = lb_[j], first_ub = mid, alt_lb = mid + 1, alt_ub = ub_[j];
        } else {
          first_lb = mid + 1, first_ub = ub_[j], alt_lb = lb_[j], alt_ub = mid;
        }
      }
      return Step::Branch;
    }
    return Step::Conflict;  // unreachable: caller checks for full assignment
  }

  void search() {
    std::vector<Frame> stack;
    bool need_prop = false;  // root already propagated
    while (true) {
      bool alive = true;
      if (need_prop) alive = propagate();
      need_prop = true;
      if (alive) {
        ++nodes_;
        if (out_of_budget()) {
          limit_hit_ = true;
          return;
        }
        if (nfixed_ == n_) {
          record_incumbent();
          alive = false;
        } else {
          int var = -1;
          std::int64_t flb, fub, alb, aub;
          Step st = choose(var, flb, fub, alb, aub);
          if (st == Step::Repropagate) continue;
          if (st == Step::Conflict) {
            alive = false;
          } else {
            stack.push_back({trail_.size(), var, alb, aub, false});
            if (!set_bounds(var, flb, fub)) alive = false;
            else {
              touch_objective();
              continue;
            }
          }
        }
      }
      // backtrack to the deepest frame with an untried alternative
      clear_queue();
      bool resumed = false;
      while (!stack.empty()) {
        Frame& f = stack.back();
        undo(f.mark);
        if (f.alt_done) {
          stack.pop_back();
          continue;
        }
        f.alt_done = true;
        if (!set_bounds(f.var, f.alt_lb, f.alt_ub)) continue;
        touch_objective();
        resumed = true;
        break;
      }
      if (!resumed) return;
    }
  }

  const MipModel& model_;
  const SolverConfig& cfg_;
  int n_ = 0, nrows_ = 0, obj_row_ = 0;
  std::vector<std::int64_t> lb_, ub_;
  std::vector<char> is_int_;
  std::int64_t scale_ = 1, obj_const_ = 0;
  std::vector<std::int64_t> obj_coef_;
  std::vector<int> row_start_, row_var_;
  std::vector<std::int64_t> row_coef_, lo_, hi_;
  std::vector<int> col_start_, col_row_;
  std::vector<std::int64_t> col_coef_;
  std::vector<std::int64_t> min_act_, max_act_, max_range_;
  std::vector<int> free_pos_bin_, free_pos_int_, free_neg_;
  std::vector<int> choice_rows_;
  std::vector<char> in_queue_;
  std::vector<int> queue_;
  std::size_t qhead_ = 0;
  std::vector<TrailEntry> trail_;
  int nfixed_ = 0;
  std::vector<std::int64_t> incumbent_;
  std::int64_t inc_value_ = 0;
  std::int64_t cutoff_ = kInf;
  std::int64_t root_bound_ = 0;
  std::int64_t nodes_ = 0, probes_ = 0;
  bool limit_hit_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

Solution solve(const MipModel& model, const SolverConfig& config) {
  if (config.rel_gap < Rational(0) || config.rel_gap >= Rational(1)) throw std::invalid_argument("rel_gap must lie in [0,1)");
  for (const auto& v : model.vars)
    if (v.lb < -(std::int64_t{1} << 40) || v.ub > (std::int64_t{1} << 40))
      throw std::invalid_argument("variable bounds too wide: " + v.name);
  Engine e(model, config);
  return e.run();
}

// ---------------------------------------------------------------------------
// LP text

namespace {

std::string coef_text(std::int64_t c, bool first) {
  std::string s;
  if (c < 0) s = first ? "-" : "- ";
  else if (!first) s = "+ ";
  std::int64_t a = c < 0 ? -c : c;
  if (a != 1) s += std::to_string(a) + " ";
  return s;
}

void wrap_terms(std::ostringstream& out, const std::vector<std::string>& parts) {
  std::size_t col = 0;
  for (const auto& p : parts) {
    if (col > 0 && col + p.size() > 200) {
      out << "\n   ";
      col = 3;
    }
    out << " " << p;
    col += p.size() + 1;
  }
}

}  // namespace

std::string export_lp(const MipModel& model) {
  std::ostringstream out;
  out << "Minimize\n obj:";
  std::vector<std::string> parts;
  bool first = true;
  for (const auto& [v, c] : model.objective) {
    if (c == Rational(0)) continue;
    std::string t = c < Rational(0) ? (first ? "-" : "- ") : (first ? "" : "+ ");
    Rational a = c < Rational(0) ? -c : c;
    if (a != Rational(1)) t += format_rational(a) + " ";
    parts.push_back(t + model.vars[v].name);
    first = false;
  }
  if (model.objective_constant != Rational(0)) {
    Rational a = model.objective_constant;
    parts.push_back(std::string(a < Rational(0) ? "- " : (first ? "" : "+ ")) + format_rational(a < Rational(0) ? -a : a));
    first = false;
  }
  if (first) parts.push_back("0 " + (model.vars.empty() ? std::string("dummy") : model.vars[0].name));
  wrap_terms(out, parts);
  out << "\nSubject To\n";
  for (const auto& r : model.rows) {
    out << " " << r.name << ":";
    parts.clear();
    for (std::size_t k = 0; k < r.terms.size(); ++k)
      parts.push_back(coef_text(r.terms[k].coeff, k == 0) + model.vars[r.terms[k].var].name);
    if (parts.empty()) parts.push_back("0 " + model.vars[0].name);
    wrap_terms(out, parts);
    out << (r.sense == Sense::Le ? " <= " : r.sense == Sense::Ge ? " >= " : " = ") << r.rhs << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : model.vars) {
    if (v.fixed()) out << " " << v.name << " = " << v.lb << "\n";
    else if (v.integer) out << " " << v.lb << " <= " << v.name << " <= " << v.ub << "\n";
  }
  std::vector<std::string> gens, bins;
  for (const auto& v : model.vars) (v.integer ? gens : bins).push_back(v.name);
  if (!gens.empty()) {
    out << "Generals\n";
    for (const auto& g : gens) out << " " << g << "\n";
  }
  if (!bins.empty()) {
    out << "Binaries\n";
    for (const auto& b : bins) out << " " << b << "\n";
  }
  out << "End\n";
  return out.str();
}

Solution import_solution(const MipModel& model, std::string_view text) {
  std::map<std::string, int> by_name;
  for (std::size_t j = 0; j < model.vars.size(); ++j) by_name[model.vars[j].name] = static_cast<int>(j);
  Solution sol;
  sol.assignment.resize(model.vars.size());
  for (std::size_t j = 0; j < model.vars.size(); ++j) sol.assignment[j] = model.vars[j].lb;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string name, val, extra;
    if (!(ls >> name)) continue;
    if (!(ls >> val) || (ls >> extra)) throw SolutionError("line " + std::to_string(lineno) + ": expected '<name> <value>'");
    auto it = by_name.find(name);
    if (it == by_name.end()) throw SolutionError("unknown variable name '" + name + "'");
    double d;
    try {
      std::size_t used = 0;
      d = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw SolutionError("line " + std::to_string(lineno) + ": bad value '" + val + "'");
    }
    double r = std::round(d);
    if (std::fabs(d - r) > 1e-6) throw SolutionError("non-integral value for " + name);
    sol.assignment[it->second] = static_cast<std::int64_t>(r);
  }
  for (std::size_t j = 0; j < model.vars.size(); ++j) {
    const auto& v = model.vars[j];
    if (sol.assignment[j] < v.lb || sol.assignment[j] > v.ub)
      throw SolutionError("value of " + v.name + " outside its bounds");
  }
  for (std::size_t r = 0; r < model.rows.size(); ++r)
    if (!model.row_holds(model.rows[r], sol.assignment))
      throw SolutionError("row " + std::to_string(r) + " (" + model.rows[r].name + ") is violated", static_cast<int>(r));
  sol.status = SolveStatus::GapFeasible;
  sol.verified = true;
  sol.objective = model.evaluate(sol.assignment);
  SolverConfig cfg;
  Engine e(model, cfg);
  auto rb = e.root_only();
  sol.bound = rb ? std::min(sol.objective, Rational(*rb, e.scale())) : sol.objective;
  return sol;
}

std::string write_solution(const MipModel& model, const Solution& sol) {
  std::ostringstream out;
  for (std::size_t j = 0; j < model.vars.size() && j < sol.assignment.size(); ++j)
    out << model.vars[j].name << " " << sol.assignment[j] << "\n";
  return out.str();
}

}  // namespace occam
