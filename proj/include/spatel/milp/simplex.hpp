#pragma once

#include <atomic>
#include <chrono>
#include <limits>
#include <vector>

#include "spatel/milp/model.hpp"
#include "spatel/simd/kernels.hpp"

namespace spatel::milp {

enum class LpStatus { Optimal, Infeasible, Cutoff, Limit };

const char* to_string(LpStatus s);

struct LpLimits {
  /// Stop as soon as the (monotone) dual objective exceeds this value.
  double cutoff = std::numeric_limits<double>::infinity();
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  const std::atomic<bool>* cancel = nullptr;
  long max_iterations = -1;
};

/// Bounded dual simplex over a dense compact tableau.
///
/// Rows of the model become logical variables s = A x with bounds from the
/// row sense, so the all-logical basis with every structural at its cheaper
/// bound is dual feasible from the start. The tableau stores B^-1 N with
/// x_B = -T x_N. Bound changes keep dual feasibility, which makes the object
/// a natural warm start for branch and bound: copy it, tighten, re-solve.
class DualSimplex {
 public:
  explicit DualSimplex(const Model& model, const simd::Kernels& kernels = simd::kernels());

  int structural_count() const { return n_; }
  int row_count() const { return m_; }

  double lower(int j) const { return lo_[static_cast<std::size_t>(j)]; }
  double upper(int j) const { return hi_[static_cast<std::size_t>(j)]; }

  /// New bounds for structural j; the basis stays dual feasible.
  void set_bounds(int j, double lower, double upper);

  LpStatus solve(const LpLimits& limits = {});

  /// c^T x at the current basis; a lower bound on the LP optimum while the
  /// basis is dual feasible.
  double objective() const;

  /// Values of the structural variables.
  std::vector<double> values() const;

  long iterations() const { return iterations_; }

  /// Reduced cost of structural j at the current basis; 0 when j is basic.
  double reduced_cost(int j) const { return is_basic_[j] ? 0.0 : d_[static_cast<std::size_t>(where_[j])]; }
  bool is_basic(int j) const { return is_basic_[j] != 0; }
  bool at_upper(int j) const { return at_upper_[j] != 0; }

 private:
  double* row(int i) { return &tab_[static_cast<std::size_t>(i) * stride_]; }
  const double* row(int i) const { return &tab_[static_cast<std::size_t>(i) * stride_]; }
  double nonbasic_value(int var) const { return at_upper_[var] ? hi_[var] : lo_[var]; }
  void shift_nonbasic(int col, double delta);
  void repair_dual_signs();
  int choose_leaving(bool bland) const;
  int choose_entering(int r, bool increase, bool bland) const;
  void pivot(int r, int q, double target);

  const simd::Kernels* k_;
  int n_ = 0;  // structurals (tableau columns)
  int m_ = 0;  // rows
  std::size_t stride_ = 0;
  std::vector<double> tab_;
  std::vector<double> d_;        // reduced cost per tableau column
  std::vector<double> cost_;     // per variable, logicals zero
  std::vector<double> lo_, hi_;  // per variable
  std::vector<double> xb_, lob_, hib_;  // per row
  std::vector<int> basic_;     // row -> variable
  std::vector<int> nonbasic_;  // column -> variable
  std::vector<int> where_;     // variable -> row or column
  std::vector<char> is_basic_;
  std::vector<char> at_upper_;
  std::vector<std::size_t> nz_;  // scratch: nonzero columns of the pivot row
  long iterations_ = 0;
};

}  // namespace spatel::milp
