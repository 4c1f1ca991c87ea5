#pragma once

#include <atomic>
#include <iosfwd>
#include <limits>
#include <vector>

#include "spatel/milp/model.hpp"
#include "spatel/simd/kernels.hpp"

namespace spatel::milp {

enum class Status { Optimal, Infeasible, RelaxationOnly, TimeLimit };
enum class IntegerMode { Exact, Relaxed };

const char* to_string(Status s);

struct SolveOptions {
  IntegerMode mode = IntegerMode::Exact;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  /// Checked between simplex iterations; a set flag ends the solve as TimeLimit.
  const std::atomic<bool>* cancel = nullptr;
  double feasibility_tol = 1e-6;
  double integrality_tol = 1e-6;
  double absolute_gap = 1e-6;
  long node_limit = -1;
  /// Only a single worker is implemented; other values are rejected.
  int workers = 1;
  const simd::Kernels* kernels = nullptr;  // default: runtime dispatch
  std::ostream* log = nullptr;
};

struct SolveStats {
  long nodes = 0;
  long lp_iterations = 0;
  double seconds = 0;
  double root_bound = 0;
  double max_violation = 0;  // of the returned point against the model
};

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> values;  // indexed by VarId, empty when no point is known
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  SolveStats stats;

  bool has_values() const { return !values.empty(); }
  double value(VarId v) const { return values.at(static_cast<std::size_t>(v.index)); }
};

/// Exact mode: branch and bound, depth-first until the first incumbent and
/// best-first after it (ties: deeper nodes first). Fractional binaries are
/// branched before general integers; within a class the pseudocost product
/// decides, declaration order on ties. LP relaxations by the dual simplex,
/// warm-started from the parent. A node is pruned once its bound is within
/// one unit of the incumbent when the objective is integral on integers.
/// Relaxed mode: the LP relaxation only. The model must be sealed.
Solution solve(const Model& model, const SolveOptions& options = {});

}  // namespace spatel::milp
