#include "spatel/milp/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "spatel/formula.hpp"

namespace spatel::milp {

const char* to_string(VarKind k) {
  switch (k) {
    case VarKind::Continuous: return "continuous";
    case VarKind::Binary: return "binary";
    case VarKind::Integer: return "integer";
  }
  return "?";
}

const char* to_string(Sense s) {
  switch (s) {
    case Sense::Le: return "<=";
    case Sense::Ge: return ">=";
    case Sense::Eq: return "=";
  }
  return "?";
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& t : o.terms_) terms_.push_back({t.var, -t.coef});
  constant_ -= o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

LinExpr LinExpr::normalized() const {
  LinExpr out;
  out.constant_ = constant_;
  out.terms_ = terms_;
  std::stable_sort(out.terms_.begin(), out.terms_.end(),
                   [](const Term& a, const Term& b) { return a.var.index < b.var.index; });
  std::vector<Term> merged;
  for (const auto& t : out.terms_) {
    if (!merged.empty() && merged.back().var == t.var) merged.back().coef += t.coef;
    else merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
  out.terms_ = std::move(merged);
  return out;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr e) { return e *= s; }
LinExpr operator*(LinExpr e, double s) { return e *= s; }
LinExpr operator-(LinExpr e) { return e *= -1.0; }

bool valid_lp_name(const std::string& name) {
  if (name.empty() || name.size() > 255) return false;
  const char c0 = name[0];
  if (std::isdigit(static_cast<unsigned char>(c0)) || c0 == '.' || c0 == 'e' || c0 == 'E') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

void Model::require_open() const {
  if (sealed_) throw ModelError("model is sealed");
}

void Model::check_var(VarId v) const {
  if (v.index < 0 || v.index >= var_count()) throw ModelError("unknown variable handle " + std::to_string(v.index));
}

VarId Model::add_var(std::string name, VarKind kind, double lower, double upper) {
  require_open();
  if (!valid_lp_name(name)) throw ModelError("invalid variable name '" + name + "'");
  if (var_names_.count(name)) throw ModelError("duplicate variable '" + name + "'");
  if (!std::isfinite(lower) || !std::isfinite(upper)) throw ModelError("variable '" + name + "' needs finite bounds");
  if (lower > upper) throw ModelError("variable '" + name + "' has empty bounds");
  if (kind == VarKind::Binary && (lower < 0 || upper > 1))
    throw ModelError("binary variable '" + name + "' must lie in [0,1]");
  const int idx = var_count();
  vars_.push_back({name, kind, lower, upper});
  var_names_.emplace(std::move(name), idx);
  return VarId{idx};
}

int Model::add_constraint(const LinExpr& lhs, Sense sense, double rhs, std::string name) {
  require_open();
  const int idx = constraint_count();
  if (name.empty()) name = "c" + std::to_string(idx);
  if (!valid_lp_name(name)) throw ModelError("invalid constraint name '" + name + "'");
  if (con_names_.count(name)) throw ModelError("duplicate constraint '" + name + "'");
  for (const auto& t : lhs.terms()) {
    check_var(t.var);
    if (!std::isfinite(t.coef)) throw ModelError("non-finite coefficient in '" + name + "'");
  }
  if (!std::isfinite(rhs - lhs.constant())) throw ModelError("non-finite right-hand side in '" + name + "'");
  const LinExpr n = lhs.normalized();
  cons_.push_back({name, n.terms(), sense, rhs - n.constant()});
  con_names_.emplace(std::move(name), idx);
  return idx;
}

void Model::set_objective(const LinExpr& objective) {
  require_open();
  for (const auto& t : objective.terms()) check_var(t.var);
  objective_ = objective.normalized();
}

void Model::set_bounds(VarId v, double lower, double upper) {
  require_open();
  check_var(v);
  auto& var = vars_[static_cast<std::size_t>(v.index)];
  if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper)
    throw ModelError("bad bounds for '" + var.name + "'");
  if (var.kind == VarKind::Binary && (lower < 0 || upper > 1))
    throw ModelError("binary variable '" + var.name + "' must lie in [0,1]");
  var.lower = lower;
  var.upper = upper;
}

std::optional<VarId> Model::find(const std::string& name) const {
  auto it = var_names_.find(name);
  if (it == var_names_.end()) return std::nullopt;
  return VarId{it->second};
}

double Model::evaluate(const std::vector<double>& x) const {
  double z = objective_.constant();
  for (const auto& t : objective_.terms()) z += t.coef * x.at(static_cast<std::size_t>(t.var.index));
  return z;
}

Model::Violation Model::worst_violation(const std::vector<double>& x, bool check_integrality) const {
  if (x.size() != vars_.size()) throw ModelError("point has the wrong dimension");
  Violation worst;
  auto note = [&](double amount, const std::string& where) {
    if (amount > worst.amount) worst = {amount, where};
  };
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    note(v.lower - x[j], "lower bound of " + v.name);
    note(x[j] - v.upper, "upper bound of " + v.name);
    if (check_integrality && v.kind != VarKind::Continuous)
      note(std::abs(x[j] - std::round(x[j])), "integrality of " + v.name);
  }
  for (const auto& c : cons_) {
    double act = 0;
    for (const auto& t : c.terms) act += t.coef * x[static_cast<std::size_t>(t.var.index)];
    if (c.sense != Sense::Ge) note(act - c.rhs, c.name + " (activity " + format_number(act) + ")");
    if (c.sense != Sense::Le) note(c.rhs - act, c.name + " (activity " + format_number(act) + ")");
  }
  return worst;
}

}  // namespace spatel::milp
