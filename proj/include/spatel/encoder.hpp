#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spatel/formula.hpp"
#include "spatel/grid.hpp"
#include "spatel/milp/model.hpp"
#include "spatel/qts.hpp"

namespace spatel {

enum class Direction { N, W, E, S };
const char* to_string(Direction d);

/// Directed move between 4-neighbors.
struct Edge {
  Cell from;
  Cell to;
  Direction dir = Direction::N;
};

/// All directed edges of the grid: cells row-major, then neighbors in
/// row-major order (N, W, E, S). Border cells have 2 or 3 edges.
std::vector<Edge> grid_edges(int depth);

enum class FlowDomain { Integer, Continuous };

struct DynamicsOptions {
  FlowDomain flows = FlowDomain::Integer;
  /// Per-cell bound on n[k] for k >= 1.
  std::optional<std::int64_t> capacity;
};

/// Decision variables of the flow network.
struct FlowVars {
  int depth = 0;
  int steps = 0;  // K
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out_edges;  // by cell index (row-major)
  std::vector<std::vector<int>> in_edges;
  std::vector<std::vector<milp::VarId>> flow;  // [k][edge], k < K
  std::vector<std::vector<milp::VarId>> occ;   // [k][cell], k <= K

  int side() const { return 1 << depth; }
  int cell_index(Cell c) const { return c.row * side() + c.col; }
};

/// Adds flow and occupancy variables, outflow caps and conservation rows.
/// n[0] is fixed to `initial` through its bounds.
FlowVars encode_dynamics(milp::Model& model, const OccupancyMatrix& initial, int steps,
                         const DynamicsOptions& options = {});

/// Linear expression of mu at node v and step k (a sum of leaf occupancies).
milp::LinExpr node_value(const FlowVars& fv, const QtsShape& shape, NodeId v, int k);

/// A satisfaction literal: a constant, or a [0,1] variable possibly complemented.
struct Literal {
  enum class Kind { False, True, Var };
  Kind kind = Kind::False;
  milp::VarId var;
  bool negated = false;

  static Literal constant(bool v) { return Literal{v ? Kind::True : Kind::False, {}, false}; }
  static Literal of(milp::VarId v, bool neg = false) { return Literal{Kind::Var, v, neg}; }
  Literal operator!() const;
  milp::LinExpr expr() const;
  /// Value under a solution vector.
  double value(const std::vector<double>& x) const;
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct EncodeOptions {
  double step = 1.0;
  /// Uniform big-M for every predicate row; at least N + c_max + 1 (+ R with
  /// robustness). 0 derives a separate constant for each row from the bounds
  /// of the node value and of rho.
  double big_m = 0;
  /// Adds the shared robustness variable and tightens every predicate.
  bool robustness = false;
  /// Node values of internal nodes as auxiliary equality-defined variables.
  bool aux_node_vars = false;
  /// Bounds of rho; default [-R, R] with R = N + c_max + 1.
  std::optional<double> rho_lower;
  std::optional<double> rho_upper;
  /// Declares rho integer. Sound when every threshold is an integer and the
  /// flows are integral, since node values are then integers too.
  bool integral_rho = false;
};

struct EncodedFormula {
  Literal root;
  std::optional<milp::VarId> rho;
  double big_m = 0;
  double rho_bound = 0;  // rho in [-rho_bound, rho_bound]
  std::size_t predicate_binaries = 0;
  std::size_t composite_vars = 0;
};

/// Translates a formula into constraints over the flow variables. Variables
/// are shared across identical sub-formulas at the same node and step.
class FormulaEncoder {
 public:
  /// `robots` and `max_threshold` size big-M and the robustness range.
  FormulaEncoder(milp::Model& model, const FlowVars& fv, const EncodeOptions& options, double robots,
                 double max_threshold);

  Literal encode(const Spatel& f, int k);
  Literal encode(const Tssl& f, NodeId v, int k);

  std::optional<milp::VarId> rho() const { return rho_; }
  double big_m() const { return big_m_; }
  /// Big-M of one row; `needed` is the largest violation the row must absorb.
  double row_m(double needed) const;
  double rho_bound() const { return rho_bound_; }
  std::size_t predicate_binaries() const { return pred_count_; }
  std::size_t composite_vars() const { return comp_count_; }

 private:
  Literal predicate(Cmp cmp, double c, NodeId v, int k);
  Literal top(bool negated);
  Literal gate(std::vector<Literal> ls, bool is_and);
  milp::LinExpr mu(NodeId v, int k);
  std::string fresh(const char* prefix) const;
  const std::string& key_of(const Tssl& f);
  const std::string& key_of(const Spatel& f);
  const Tssl& unrolled(const Tssl& until);

  milp::Model& m_;
  const FlowVars& fv_;
  EncodeOptions opt_;
  QtsShape shape_;
  double big_m_ = 0;
  double rho_bound_ = 0;
  double robots_ = 0;
  double rho_lo_ = 0;
  double rho_hi_ = 0;
  std::optional<milp::VarId> rho_;
  std::optional<Literal> top_[2];
  std::size_t pred_count_ = 0, comp_count_ = 0;
  std::vector<std::vector<std::optional<milp::VarId>>> aux_;  // [k][node]

  std::map<std::tuple<int, int, int, double>, Literal> preds_;  // (k, v, cmp, c)
  std::map<std::pair<bool, std::vector<std::pair<int, bool>>>, Literal> gates_;
  std::map<std::tuple<std::string, int, int>, Literal> tssl_memo_;  // (key, v, k)
  std::map<std::pair<std::string, int>, Literal> spatel_memo_;      // (key, k)
  std::unordered_map<const void*, std::string> keys_;
  std::map<std::string, Tssl> unrolled_;
  std::vector<Tssl> keep_tssl_;  // keyed nodes stay alive so identities are not reused
  std::vector<Spatel> keep_spatel_;
};

/// Validates, builds the encoder and returns the root literal of `f` at step 0.
/// Throws std::invalid_argument when the formula looks past step K or when a
/// given big-M is too small; robustness mode needs an NNF formula.
EncodedFormula encode_formula(milp::Model& model, const FlowVars& fv, const Spatel& f, const EncodeOptions& options);

/// Forces a literal to be true.
void pin(milp::Model& model, const Literal& l);

}  // namespace spatel
