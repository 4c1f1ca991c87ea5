#include "spatel/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spatel/analysis.hpp"

namespace spatel {

using milp::LinExpr;
using milp::Sense;
using milp::VarId;
using milp::VarKind;

const char* to_string(Direction d) {
  switch (d) {
    case Direction::N: return "N";
    case Direction::W: return "W";
    case Direction::E: return "E";
    case Direction::S: return "S";
  }
  return "?";
}

std::vector<Edge> grid_edges(int depth) {
  const int side = 1 << depth;
  std::vector<Edge> out;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const Cell from{r, c};
      if (r > 0) out.push_back({from, {r - 1, c}, Direction::N});
      if (c > 0) out.push_back({from, {r, c - 1}, Direction::W});
      if (c + 1 < side) out.push_back({from, {r, c + 1}, Direction::E});
      if (r + 1 < side) out.push_back({from, {r + 1, c}, Direction::S});
    }
  return out;
}

namespace {
std::string cell_tag(Cell c) { return "r" + std::to_string(c.row) + "c" + std::to_string(c.col); }
}  // namespace

FlowVars encode_dynamics(milp::Model& model, const OccupancyMatrix& initial, int steps,
                         const DynamicsOptions& options) {
  if (steps < 1) throw std::invalid_argument("encode_dynamics: need at least one step");
  if (options.capacity && *options.capacity < 0) throw std::invalid_argument("encode_dynamics: negative capacity");
  FlowVars fv;
  fv.depth = initial.depth();
  fv.steps = steps;
  fv.edges = grid_edges(fv.depth);
  const int cells = fv.side() * fv.side();
  fv.out_edges.resize(cells);
  fv.in_edges.resize(cells);
  for (int e = 0; e < static_cast<int>(fv.edges.size()); ++e) {
    fv.out_edges[fv.cell_index(fv.edges[e].from)].push_back(e);
    fv.in_edges[fv.cell_index(fv.edges[e].to)].push_back(e);
  }
  const double n = static_cast<double>(initial.total());
  for (std::int64_t v : initial.counts())
    if (v < 0) throw std::invalid_argument("encode_dynamics: negative initial occupancy");
  const VarKind flow_kind = options.flows == FlowDomain::Integer ? VarKind::Integer : VarKind::Continuous;

  fv.occ.resize(steps + 1);
  fv.flow.resize(steps);
  for (int k = 0; k <= steps; ++k) {
    for (int i = 0; i < cells; ++i) {
      const Cell c{i / fv.side(), i % fv.side()};
      const std::string name = "n" + std::to_string(k) + "_" + cell_tag(c);
      if (k == 0) {
        const double v = static_cast<double>(initial.at(c));
        fv.occ[k].push_back(model.add_var(name, flow_kind, v, v));
      } else {
        double hi = n;
        if (options.capacity) hi = std::min(hi, static_cast<double>(*options.capacity));
        fv.occ[k].push_back(model.add_var(name, flow_kind, 0, hi));
      }
    }
    if (k == steps) break;
    for (const Edge& e : fv.edges)
      fv.flow[k].push_back(model.add_var(
          "f" + std::to_string(k) + "_" + cell_tag(e.from) + "_" + to_string(e.dir), flow_kind, 0, n));
  }
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < cells; ++i) {
      const std::string tag = std::to_string(k) + "_" + cell_tag({i / fv.side(), i % fv.side()});
      LinExpr out;
      for (int e : fv.out_edges[i]) out.add(fv.flow[k][e], 1);
      model.add_constraint(out - LinExpr(fv.occ[k][i]), Sense::Le, 0, "cap" + tag);
      LinExpr bal = LinExpr(fv.occ[k + 1][i]) - LinExpr(fv.occ[k][i]) + out;
      for (int e : fv.in_edges[i]) bal.add(fv.flow[k][e], -1);
      model.add_constraint(bal, Sense::Eq, 0, "bal" + tag);
    }
  }
  return fv;
}

LinExpr node_value(const FlowVars& fv, const QtsShape& shape, NodeId v, int k) {
  LinExpr e;
  for (Cell c : shape.cells_under(v)) e.add(fv.occ.at(k)[fv.cell_index(c)], 1);
  return e;
}

Literal Literal::operator!() const {
  if (kind == Kind::Var) return of(var, !negated);
  return constant(kind == Kind::False);
}

LinExpr Literal::expr() const {
  switch (kind) {
    case Kind::False: return LinExpr(0.0);
    case Kind::True: return LinExpr(1.0);
    case Kind::Var: return negated ? LinExpr(1.0) - LinExpr(var) : LinExpr(var);
  }
  return {};
}

double Literal::value(const std::vector<double>& x) const {
  switch (kind) {
    case Kind::False: return 0;
    case Kind::True: return 1;
    case Kind::Var: {
      const double z = x.at(static_cast<std::size_t>(var.index));
      return negated ? 1 - z : z;
    }
  }
  return 0;
}

FormulaEncoder::FormulaEncoder(milp::Model& model, const FlowVars& fv, const EncodeOptions& options,
                               double robots, double max_threshold)
    : m_(model), fv_(fv), opt_(options), shape_(fv.depth) {
  if (!(opt_.step > 0)) throw std::invalid_argument("encoder: step must be positive");
  const double base = robots + max_threshold + 1;
  rho_bound_ = opt_.robustness ? base : 0;
  const double needed = base + rho_bound_;
  big_m_ = opt_.big_m > 0 ? opt_.big_m : needed;
  if (big_m_ < needed)
    throw std::invalid_argument("encoder: big-M " + format_number(big_m_) + " is below the required " +
                                format_number(needed));
  robots_ = robots;
  if (opt_.robustness) {
    rho_lo_ = opt_.rho_lower.value_or(-rho_bound_);
    rho_hi_ = opt_.rho_upper.value_or(rho_bound_);
    if (rho_lo_ < -rho_bound_ || rho_hi_ > rho_bound_ || rho_lo_ > rho_hi_)
      throw std::invalid_argument("encoder: rho range [" + format_number(rho_lo_) + ", " + format_number(rho_hi_) +
                                  "] is empty or leaves [-" + format_number(rho_bound_) + ", " +
                                  format_number(rho_bound_) + "]");
    rho_ = m_.add_var(m_.find("rho") ? fresh("rho") : "rho",
                      opt_.integral_rho ? VarKind::Integer : VarKind::Continuous, rho_lo_, rho_hi_);
  }
  if (opt_.aux_node_vars) aux_.resize(fv.occ.size(), std::vector<std::optional<VarId>>(shape_.node_count()));
}

double FormulaEncoder::row_m(double needed) const { return opt_.big_m > 0 ? big_m_ : std::max(0.0, needed); }

// Names carry the variable index, so several encoders can share a model.
std::string FormulaEncoder::fresh(const char* prefix) const { return prefix + std::to_string(m_.var_count()); }

LinExpr FormulaEncoder::mu(NodeId v, int k) {
  if (!opt_.aux_node_vars || shape_.is_leaf(v)) {
    if (shape_.is_leaf(v)) return LinExpr(fv_.occ.at(k)[fv_.cell_index(shape_.corner(v))]);
    return node_value(fv_, shape_, v, k);
  }
  auto& slot = aux_.at(k)[v];
  if (!slot) {
    double total = 0;
    for (VarId x : fv_.occ[0]) total += m_.var(x).lower;
    const VarId a = m_.add_var(fresh("mu"), VarKind::Continuous, 0, total);
    LinExpr def(a);
    for (Label l : kAllLabels) def -= mu(shape_.child(v, l), k);
    m_.add_constraint(def, Sense::Eq, 0);
    slot = a;
  }
  return LinExpr(*slot);
}

// z = 1 forces the (tightened) atom, z = 0 its complement.
Literal FormulaEncoder::predicate(Cmp cmp, double c, NodeId v, int k) {
  const auto key = std::make_tuple(k, v, static_cast<int>(cmp), c);
  if (auto it = preds_.find(key); it != preds_.end()) return it->second;
  const VarId z = m_.add_binary(fresh("zp"));
  ++pred_count_;
  LinExpr thr(c);
  if (rho_) thr += LinExpr(*rho_, cmp == Cmp::Ge ? 1.0 : -1.0);
  const LinExpr value = mu(v, k);
  // node values lie in [0, N]
  if (cmp == Cmp::Ge) {
    m_.add_constraint(value - row_m(robots_ - c - rho_lo_) * LinExpr(z) - thr, Sense::Le, 0);
    m_.add_constraint(value + row_m(c + rho_hi_) * (LinExpr(1.0) - LinExpr(z)) - thr, Sense::Ge, 0);
  } else {
    m_.add_constraint(value - row_m(robots_ - c + rho_hi_) * (LinExpr(1.0) - LinExpr(z)) - thr, Sense::Le, 0);
    m_.add_constraint(value + row_m(c - rho_lo_) * LinExpr(z) - thr, Sense::Ge, 0);
  }
  const Literal l = Literal::of(z);
  preds_.emplace(key, l);
  return l;
}

Literal FormulaEncoder::top(bool negated) {
  if (!rho_) return Literal::constant(!negated);
  auto& slot = top_[negated ? 1 : 0];
  if (!slot) {
    // Robustness of true is 1: z = 1 iff 1 >= rho (negated: -1 >= rho).
    const VarId z = m_.add_binary(fresh("zp"));
    ++pred_count_;
    if (!negated) {
      m_.add_constraint(LinExpr(1.0) - row_m(1 - rho_lo_) * LinExpr(z) - LinExpr(*rho_), Sense::Le, 0);
      m_.add_constraint(LinExpr(1.0) + row_m(rho_hi_ - 1) * (LinExpr(1.0) - LinExpr(z)) - LinExpr(*rho_), Sense::Ge, 0);
    } else {
      m_.add_constraint(LinExpr(1.0) - row_m(1 + rho_hi_) * (LinExpr(1.0) - LinExpr(z)) + LinExpr(*rho_), Sense::Le, 0);
      m_.add_constraint(LinExpr(1.0) + row_m(-1 - rho_lo_) * LinExpr(z) + LinExpr(*rho_), Sense::Ge, 0);
    }
    slot = Literal::of(z);
  }
  return *slot;
}

Literal FormulaEncoder::gate(std::vector<Literal> ls, bool is_and) {
  // Absorbing constant for this gate, and the neutral one.
  const auto absorbing = is_and ? Literal::Kind::False : Literal::Kind::True;
  std::vector<std::pair<int, bool>> vars;
  for (const Literal& l : ls) {
    if (l.kind == absorbing) return Literal::constant(!is_and);
    if (l.kind == Literal::Kind::Var) vars.emplace_back(l.var.index, l.negated);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (std::size_t i = 1; i < vars.size(); ++i)
    if (vars[i].first == vars[i - 1].first) return Literal::constant(!is_and);  // x and not x
  if (vars.empty()) return Literal::constant(is_and);
  if (vars.size() == 1) return Literal::of(VarId{vars[0].first}, vars[0].second);

  auto key = std::make_pair(is_and, vars);
  if (auto it = gates_.find(key); it != gates_.end()) return it->second;
  const VarId z = m_.add_var(fresh("zg"), VarKind::Continuous, 0, 1);
  ++comp_count_;
  LinExpr sum;
  for (const auto& [idx, neg] : vars) {
    const LinExpr e = Literal::of(VarId{idx}, neg).expr();
    sum += e;
    m_.add_constraint(LinExpr(z) - e, is_and ? Sense::Le : Sense::Ge, 0);
  }
  const double m = static_cast<double>(vars.size());
  if (is_and)
    m_.add_constraint(LinExpr(z) - sum, Sense::Ge, 1 - m);
  else
    m_.add_constraint(LinExpr(z) - sum, Sense::Le, 0);
  const Literal l = Literal::of(z);
  gates_.emplace(std::move(key), l);
  return l;
}

const std::string& FormulaEncoder::key_of(const Tssl& f) {
  auto it = keys_.find(f.identity());
  if (it != keys_.end()) return it->second;
  keep_tssl_.push_back(f);
  return keys_.emplace(f.identity(), "T" + to_string(f)).first->second;
}

const std::string& FormulaEncoder::key_of(const Spatel& f) {
  auto it = keys_.find(f.identity());
  if (it != keys_.end()) return it->second;
  keep_spatel_.push_back(f);
  return keys_.emplace(f.identity(), "S" + to_string(f)).first->second;
}

const Tssl& FormulaEncoder::unrolled(const Tssl& until) {
  const std::string& key = key_of(until);
  auto it = unrolled_.find(key);
  if (it == unrolled_.end()) it = unrolled_.emplace(key, unroll_spatial_until(until)).first;
  return it->second;
}

Literal FormulaEncoder::encode(const Tssl& f, NodeId v, int k) {
  if (k < 0 || k > fv_.steps) throw std::out_of_range("encoder: step outside 0..K");
  switch (f.kind()) {
    case Tssl::Kind::True: return top(false);
    case Tssl::Kind::Pred: return predicate(f.cmp(), f.threshold(), v, k);
    default: break;
  }
  auto memo_key = std::make_tuple(key_of(f), v, k);
  if (auto it = tssl_memo_.find(memo_key); it != tssl_memo_.end()) return it->second;
  Literal out;
  switch (f.kind()) {
    case Tssl::Kind::Not: {
      const Tssl& c = f.child(0);
      if (c.kind() == Tssl::Kind::Pred)
        out = predicate(c.cmp() == Cmp::Ge ? Cmp::Le : Cmp::Ge, c.threshold(), v, k);
      else if (c.kind() == Tssl::Kind::True)
        out = top(true);
      else if (rho_)
        throw std::invalid_argument("encoder: robustness mode needs negation normal form");
      else
        out = !encode(c, v, k);
      break;
    }
    case Tssl::Kind::And:
    case Tssl::Kind::Or: {
      std::vector<Literal> ls;
      for (const auto& c : f.children()) ls.push_back(encode(c, v, k));
      out = gate(std::move(ls), f.kind() == Tssl::Kind::And);
      break;
    }
    case Tssl::Kind::ExistsNext:
    case Tssl::Kind::ForallNext: {
      std::vector<Literal> ls;
      for (NodeId s : shape_.successors(v, f.labels())) ls.push_back(encode(f.child(0), s, k));
      out = gate(std::move(ls), f.kind() == Tssl::Kind::ForallNext);
      break;
    }
    case Tssl::Kind::ExistsUntil:
    case Tssl::Kind::ForallUntil: out = encode(unrolled(f), v, k); break;
    default: break;
  }
  tssl_memo_.emplace(std::move(memo_key), out);
  return out;
}

Literal FormulaEncoder::encode(const Spatel& f, int k) {
  if (f.kind() == Spatel::Kind::Tssl) return encode(f.tssl(), shape_.root(), k);
  auto memo_key = std::make_pair(key_of(f), k);
  if (auto it = spatel_memo_.find(memo_key); it != spatel_memo_.end()) return it->second;
  Literal out;
  switch (f.kind()) {
    case Spatel::Kind::Not:
      if (rho_) throw std::invalid_argument("encoder: robustness mode needs negation normal form");
      out = !encode(f.child(0), k);
      break;
    case Spatel::Kind::And:
    case Spatel::Kind::Or: {
      std::vector<Literal> ls;
      for (const auto& c : f.children()) ls.push_back(encode(c, k));
      out = gate(std::move(ls), f.kind() == Spatel::Kind::And);
      break;
    }
    case Spatel::Kind::Eventually:
    case Spatel::Kind::Always: {
      const auto w = step_window(f.interval(), opt_.step, k);
      std::vector<Literal> ls;
      for (int t = w.first; t < w.last; ++t) ls.push_back(encode(f.child(0), t));
      out = gate(std::move(ls), f.kind() == Spatel::Kind::Always);
      break;
    }
    case Spatel::Kind::Until: {
      const auto w = step_window(f.interval(), opt_.step, k);
      std::vector<Literal> options;
      std::vector<Literal> prefix;
      for (int t = w.first; t < w.last; ++t) {
        std::vector<Literal> term = prefix;
        term.push_back(encode(f.child(1), t));
        options.push_back(gate(std::move(term), true));
        prefix.push_back(encode(f.child(0), t));
      }
      out = gate(std::move(options), false);
      break;
    }
    default: break;
  }
  spatel_memo_.emplace(std::move(memo_key), out);
  return out;
}

EncodedFormula encode_formula(milp::Model& model, const FlowVars& fv, const Spatel& f, const EncodeOptions& options) {
  if (options.robustness && !is_nnf(f))
    throw std::invalid_argument("encoder: robustness mode needs negation normal form");
  const int needed = max_step_touched(f, options.step);
  if (needed > fv.steps)
    throw std::invalid_argument("encoder: formula looks ahead to step " + std::to_string(needed) +
                                " but the horizon is K = " + std::to_string(fv.steps));
  double robots = 0;
  for (VarId x : fv.occ.at(0)) robots += model.var(x).lower;
  FormulaEncoder enc(model, fv, options, robots, max_abs_threshold(f));
  EncodedFormula out;
  out.root = enc.encode(f, 0);
  out.rho = enc.rho();
  out.big_m = enc.big_m();
  out.rho_bound = enc.rho_bound();
  out.predicate_binaries = enc.predicate_binaries();
  out.composite_vars = enc.composite_vars();
  return out;
}

void pin(milp::Model& model, const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::True: return;
    case Literal::Kind::False:
      // Constant false: an explicitly infeasible row keeps the model honest.
      model.add_constraint(LinExpr(0.0), Sense::Ge, 1, "pin_false");
      return;
    case Literal::Kind::Var: {
      const double v = l.negated ? 0 : 1;
      model.set_bounds(l.var, v, v);
      return;
    }
  }
}

}  // namespace spatel
