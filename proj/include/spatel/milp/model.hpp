#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace spatel::milp {

enum class VarKind { Continuous, Binary, Integer };
enum class Sense { Le, Ge, Eq };

const char* to_string(VarKind k);
const char* to_string(Sense s);

/// Stable handle of a declared variable.
struct VarId {
  int index = -1;
  friend bool operator==(VarId, VarId) = default;
};

struct Term {
  VarId var;
  double coef = 0;
};

/// Sparse affine expression sum(coef * var) + constant.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT: implicit on purpose
  LinExpr(VarId v, double coef = 1.0) : terms_{{v, coef}} {}  // NOLINT

  LinExpr& add(VarId v, double coef) {
    terms_.push_back({v, coef});
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }

  /// Duplicate variables merged, zero coefficients dropped, sorted by index.
  LinExpr normalized() const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr e);
LinExpr operator*(LinExpr e, double s);
LinExpr operator-(LinExpr e);

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0;
  double upper = 0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // normalized
  Sense sense = Sense::Le;
  double rhs = 0;
};

class ModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Minimization model with finite variable bounds. Names must be valid LP
/// identifiers: letters, digits, _ and ., not starting with a
/// digit, '.', 'e' or 'E'.
class Model {
 public:
  VarId add_var(std::string name, VarKind kind, double lower, double upper);
  VarId add_binary(std::string name) { return add_var(std::move(name), VarKind::Binary, 0, 1); }

  /// Stores lhs sense rhs with the constant of lhs moved to the right.
  int add_constraint(const LinExpr& lhs, Sense sense, double rhs, std::string name = {});
  void set_objective(const LinExpr& objective);
  void set_bounds(VarId v, double lower, double upper);

  void seal() { sealed_ = true; }
  bool sealed() const { return sealed_; }

  int var_count() const { return static_cast<int>(vars_.size()); }
  int constraint_count() const { return static_cast<int>(cons_.size()); }
  const Variable& var(VarId v) const { return vars_.at(static_cast<std::size_t>(v.index)); }
  const std::vector<Variable>& vars() const { return vars_; }
  const Constraint& constraint(int i) const { return cons_.at(static_cast<std::size_t>(i)); }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const LinExpr& objective() const { return objective_; }

  std::optional<VarId> find(const std::string& name) const;
  bool is_integral(VarId v) const { return var(v).kind != VarKind::Continuous; }

  /// Objective value and worst constraint/bound violation of a point.
  double evaluate(const std::vector<double>& x) const;
  struct Violation {
    double amount = 0;
    std::string where;
  };
  Violation worst_violation(const std::vector<double>& x, bool check_integrality = true) const;

 private:
  void require_open() const;
  void check_var(VarId v) const;

  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  LinExpr objective_;
  std::unordered_map<std::string, int> var_names_;
  std::unordered_map<std::string, int> con_names_;
  bool sealed_ = false;
};

bool valid_lp_name(const std::string& name);

}  // namespace spatel::milp
