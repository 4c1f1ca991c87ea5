#include "spatel/milp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <queue>

#include "spatel/milp/simplex.hpp"

namespace spatel::milp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::RelaxationOnly: return "relaxation_only";
    case Status::TimeLimit: return "time_limit";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  std::vector<BoundChange> changes;  // cumulative from the root
  double bound = 0;
  int depth = 0;
  long id = 0;
  long parent = -1;
  // the branching that created this node, for pseudocost updates
  int var = -1;
  bool up = false;
  double step = 0;
};

/// Average objective gain per unit of bound movement, per variable and side.
class Pseudocosts {
 public:
  explicit Pseudocosts(int n) : sum_(2 * static_cast<std::size_t>(n), 0.0), count_(sum_.size(), 0) {}

  void record(int var, bool up, double gain_per_unit) {
    const std::size_t i = slot(var, up);
    sum_[i] += gain_per_unit;
    ++count_[i];
    total_[up] += gain_per_unit;
    ++total_count_[up];
  }

  double estimate(int var, bool up) const {
    const std::size_t i = slot(var, up);
    if (count_[i] > 0) return sum_[i] / count_[i];
    return total_count_[up] > 0 ? total_[up] / total_count_[up] : 1.0;
  }

 private:
  static std::size_t slot(int var, bool up) { return 2 * static_cast<std::size_t>(var) + (up ? 1 : 0); }
  std::vector<double> sum_;
  std::vector<long> count_;
  double total_[2] = {0, 0};
  long total_count_[2] = {0, 0};
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    // priority_queue pops the largest: invert for smallest bound first.
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

void apply_changes(DualSimplex& lp, const std::vector<BoundChange>& changes) {
  for (const auto& c : changes) lp.set_bounds(c.var, c.lower, c.upper);
}

std::vector<BoundChange> with_change(const std::vector<BoundChange>& base, BoundChange c) {
  std::vector<BoundChange> out = base;
  for (auto& b : out)
    if (b.var == c.var) {
      b = c;
      return out;
    }
  out.push_back(c);
  return out;
}

/// Fixes integer variables at their rounded values and re-solves the LP from
/// scratch, giving a clean continuous part.
std::optional<std::vector<double>> polish(const Model& model, const std::vector<double>& x,
                                          const simd::Kernels& k) {
  DualSimplex lp(model, k);
  for (int j = 0; j < model.var_count(); ++j) {
    if (!model.is_integral(VarId{j})) continue;
    const double r = std::clamp(std::round(x[j]), model.vars()[j].lower, model.vars()[j].upper);
    lp.set_bounds(j, r, r);
  }
  if (lp.solve() != LpStatus::Optimal) return std::nullopt;
  auto y = lp.values();
  for (int j = 0; j < model.var_count(); ++j)
    if (model.is_integral(VarId{j})) y[j] = std::round(y[j]);
  return y;
}

}  // namespace

Solution solve(const Model& model, const SolveOptions& opt) {
  if (!model.sealed()) throw ModelError("solve needs a sealed model");
  if (opt.workers != 1) throw ModelError("only single-worker solving is supported");
  const auto start = Clock::now();
  const simd::Kernels& kern = opt.kernels ? *opt.kernels : simd::kernels();

  LpLimits limits;
  limits.cancel = opt.cancel;
  if (std::isfinite(opt.time_limit))
    limits.deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opt.time_limit));

  Solution sol;
  auto finish = [&](Solution& s) -> Solution {
    s.stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (s.has_values()) {
      s.objective = model.evaluate(s.values);
      s.stats.max_violation = model.worst_violation(s.values, s.status != Status::RelaxationOnly).amount;
    }
    return s;
  };

  DualSimplex current(model, kern);
  const LpStatus root_status = current.solve(limits);
  sol.stats.lp_iterations = current.iterations();
  sol.stats.nodes = 1;
  if (root_status == LpStatus::Infeasible) {
    sol.status = Status::Infeasible;
    return finish(sol);
  }
  if (root_status == LpStatus::Limit) {
    sol.status = Status::TimeLimit;
    return finish(sol);
  }
  sol.stats.root_bound = current.objective();
  if (opt.mode == IntegerMode::Relaxed) {
    sol.status = Status::RelaxationOnly;
    sol.values = current.values();
    sol.bound = sol.stats.root_bound;
    sol.gap = 0;
    return finish(sol);
  }

  const DualSimplex root = current;
  long current_owner = 0;
  DualSimplex snapshot = root;
  long snapshot_owner = 0;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 1;
  double incumbent = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  bool limited = false;

  // Depth-first until the first incumbent, best-first after it.
  std::vector<Node> dive;
  auto pending = [&] { return !dive.empty() || !open.empty(); };
  auto open_bound = [&] {
    double b = open.empty() ? incumbent : open.top().bound;
    for (const auto& n : dive) b = std::min(b, n.bound);
    return b;
  };

  auto log_line = [&](const char* what) {
    if (!opt.log) return;
    *opt.log << what << " nodes=" << sol.stats.nodes << " open=" << open.size() + dive.size()
             << " incumbent=" << incumbent << " bound=" << open_bound()
             << " lp_iter=" << sol.stats.lp_iterations << "\n";
  };

  // Binaries are branched on before general integers: fixing the logic
  // usually leaves the rest integral.
  // An objective that is an integer combination of integer variables moves
  // in whole units, so a node is useless unless it can beat the incumbent by 1.
  bool integral_objective = true;
  for (const auto& t : model.objective().terms())
    if (!model.is_integral(t.var) || t.coef != std::round(t.coef)) integral_objective = false;
  const double margin = integral_objective ? 1 - opt.integrality_tol : opt.absolute_gap;

  Pseudocosts pc(model.var_count());
  std::vector<char> binary(model.var_count(), 0);
  for (int j = 0; j < model.var_count(); ++j)
    binary[j] = model.is_integral(VarId{j}) && model.vars()[j].upper - model.vars()[j].lower <= 1;

  // Evaluates the LP state left in `current` for `node`.
  auto process = [&](const Node& node) {
    const double obj = current.objective();
    if (obj > incumbent - margin) return;
    const auto x = current.values();
    // Product score of the estimated gains on both sides.
    int branch = -1;
    double best_score = -1;
    bool branch_binary = false;
    for (int j = 0; j < model.var_count(); ++j) {
      if (!model.is_integral(VarId{j})) continue;
      const double frac = x[j] - std::floor(x[j]);
      if (std::min(frac, 1 - frac) <= opt.integrality_tol) continue;
      const double score = std::max(pc.estimate(j, false) * frac, 1e-6) * std::max(pc.estimate(j, true) * (1 - frac), 1e-6);
      if (binary[j] != branch_binary ? binary[j] : score > best_score * (1 + 1e-9)) {
        best_score = score;
        branch = j;
        branch_binary = binary[j];
      }
    }
    if (branch < 0) {
      incumbent = obj;
      best = x;
      for (auto& n : dive) open.push(std::move(n));
      dive.clear();
      log_line("incumbent");
      return;
    }
    // Reduced-cost tightening: moving a nonbasic integer variable away from
    // its bound by t costs at least |d| t, which the incumbent caps.
    std::vector<BoundChange> changes = node.changes;
    if (std::isfinite(incumbent)) {
      const double room = incumbent - margin - obj;
      for (int j = 0; j < model.var_count(); ++j) {
        if (!model.is_integral(VarId{j}) || current.is_basic(j) || j == branch) continue;
        const double lo = current.lower(j), hi = current.upper(j);
        if (lo == hi) continue;
        const double d = current.reduced_cost(j);
        const double t = std::floor(room / std::abs(d) + 1e-9);
        if (!current.at_upper(j) && d > 0 && lo + t < hi) changes = with_change(changes, {j, lo, lo + t});
        if (current.at_upper(j) && d < 0 && hi - t > lo) changes = with_change(changes, {j, hi - t, hi});
      }
    }
    const double v = x[branch];
    const double lo = current.lower(branch);
    const double hi = current.upper(branch);
    Node down{with_change(changes, {branch, lo, std::floor(v)}), obj, node.depth + 1, next_id++, node.id,
              branch, false, v - std::floor(v)};
    Node up{with_change(changes, {branch, std::ceil(v), hi}), obj, node.depth + 1, next_id++, node.id,
            branch, true, std::ceil(v) - v};
    snapshot = current;
    snapshot_owner = node.id;
    if (std::isfinite(incumbent)) {
      open.push(std::move(down));
      open.push(std::move(up));
    } else if (v - std::floor(v) >= 0.5) {  // nearer rounding on top
      dive.push_back(std::move(down));
      dive.push_back(std::move(up));
    } else {
      dive.push_back(std::move(up));
      dive.push_back(std::move(down));
    }
  };

  process(Node{{}, sol.stats.root_bound, 0, 0, -1});

  while (pending()) {
    if (dive.empty() && open.top().bound > incumbent - margin) break;
    if (opt.node_limit >= 0 && sol.stats.nodes >= opt.node_limit) {
      limited = true;
      break;
    }
    if ((opt.cancel && opt.cancel->load()) || Clock::now() > limits.deadline) {
      limited = true;
      break;
    }
    Node node;
    if (!dive.empty()) {
      node = std::move(dive.back());
      dive.pop_back();
    } else {
      node = open.top();
      open.pop();
    }
    if (node.parent == current_owner) {
      // Continue from the parent's final tableau.
    } else if (node.parent == snapshot_owner) {
      current = snapshot;
    } else {
      current = root;
    }
    apply_changes(current, node.changes);
    current_owner = node.id;
    const long before = current.iterations();
    limits.cutoff = std::isfinite(incumbent) ? incumbent - margin : std::numeric_limits<double>::infinity();
    const LpStatus st = current.solve(limits);
    sol.stats.lp_iterations += current.iterations() - before;
    ++sol.stats.nodes;
    if (opt.log && sol.stats.nodes % 1000 == 0) log_line("progress");
    if (st == LpStatus::Limit) {
      if (std::isfinite(incumbent)) open.push(std::move(node));
      else dive.push_back(std::move(node));
      limited = true;
      break;
    }
    if (st != LpStatus::Optimal) continue;
    if (node.var >= 0) pc.record(node.var, node.up, std::max(0.0, current.objective() - node.bound) / node.step);
    node.bound = std::max(node.bound, current.objective());
    process(node);
  }

  sol.bound = std::min(incumbent, open_bound());
  if (best.empty()) {
    sol.status = limited ? Status::TimeLimit : Status::Infeasible;
    return finish(sol);
  }
  if (auto p = polish(model, best, kern)) best = std::move(*p);
  sol.values = std::move(best);
  sol.status = limited ? Status::TimeLimit : Status::Optimal;
  sol.gap = std::max(0.0, incumbent - sol.bound);
  return finish(sol);
}

}  // namespace spatel::milp
