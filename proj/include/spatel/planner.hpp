#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatel/encoder.hpp"
#include "spatel/formula.hpp"
#include "spatel/grid.hpp"
#include "spatel/milp/solver.hpp"

namespace spatel {

enum class PlanMode { Exact, RelaxedRound };
enum class RunningCost { TotalDisplacement, None };

const char* to_string(PlanMode m);
PlanMode plan_mode_from_string(const std::string& s);

struct PlannerConfig {
  double alpha = 0;
  RunningCost running_cost = RunningCost::TotalDisplacement;
  PlanMode mode = PlanMode::Exact;
  std::optional<std::int64_t> capacity;
  /// Lower bound on rho in the strict solve.
  double epsilon = 0;
  double time_limit = std::numeric_limits<double>::infinity();
  const std::atomic<bool>* cancel = nullptr;
  /// 0 picks the encoder default.
  double big_m = 0;
  bool aux_node_vars = false;
  const simd::Kernels* kernels = nullptr;
  std::ostream* log = nullptr;

  void validate() const;
};

/// Robots moved from one cell to a neighbor during step k.
struct FlowEntry {
  int step = 0;
  Cell from;
  Cell to;
  std::int64_t count = 0;
  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

enum class PlanStatus { Optimal, BestEffort, TimeLimit };
const char* to_string(PlanStatus s);

struct FlowPlan {
  int depth = 0;
  double step = 1;
  PlanMode mode = PlanMode::Exact;
  PlanStatus status = PlanStatus::Optimal;
  /// Non-zero flows, ordered by step, then edge order.
  std::vector<FlowEntry> flows;
  std::vector<OccupancyMatrix> occupancies;  // N[0..K]
  /// rho from the solver (fractional in relaxed mode).
  double robustness = 0;
  /// rho of the returned occupancies under the monitor.
  double monitored_robustness = 0;
  double objective = 0;
  std::int64_t displacement_total = 0;

  int steps() const { return static_cast<int>(occupancies.size()) - 1; }
  bool best_effort() const { return status == PlanStatus::BestEffort; }
};

/// Solver bookkeeping kept out of the plan file.
struct PlanReport {
  milp::SolveStats strict;
  std::optional<milp::SolveStats> violation;
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t predicate_binaries = 0;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the time limit expires before any plan is known.
class PlanTimeout : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

/// The assembled MILP for one planning run.
struct PlanningProblem {
  milp::Model model;
  FlowVars flows;
  EncodedFormula formula;
  Spatel nnf = Spatel::spatial(Tssl::top());
  int steps = 0;
  bool violation_mode = false;
};

/// K = horizon / step, at least 1.
int planning_steps(const Spatel& f, double step);

/// Builds dynamics, the robustness encoding, the pinned root and the objective.
/// Strict mode: rho >= epsilon and objective -alpha rho + running cost.
/// Violation mode: rho free in its range and objective -rho.
PlanningProblem build_problem(const GridConfig& cfg, const PlannerConfig& pcfg, const OccupancyMatrix& n0,
                              const Spatel& phi, bool violation_mode = false);

/// Solves strict mode and falls back to violation mode when it is infeasible.
FlowPlan plan(const GridConfig& cfg, const PlannerConfig& pcfg, const OccupancyMatrix& n0, const Spatel& phi,
              PlanReport* report = nullptr);

/// Turns a solution of `problem` into a plan (rounding in relaxed mode) and
/// monitors the result.
FlowPlan finish_plan(const PlanningProblem& problem, const milp::Solution& sol, const GridConfig& cfg,
                     PlanMode mode, PlanStatus status);

/// Occupancy frames from a solution; the recurrence is checked against the
/// flow values and both must be integral to 1e-6.
std::vector<OccupancyMatrix> extract_occupancies(const std::vector<double>& values, const FlowVars& fv);

/// Integer flows [k][edge] of an integral solution.
std::vector<std::vector<std::int64_t>> extract_flows(const std::vector<double>& values, const FlowVars& fv);

/// Largest-remainder rounding of fractional flows [k][edge], stepping the
/// occupancy forward from n0 so every intermediate frame is integral.
struct RoundedFlows {
  std::vector<std::vector<std::int64_t>> flows;
  std::vector<OccupancyMatrix> occupancies;
};
RoundedFlows round_relaxed(const std::vector<std::vector<double>>& flows, const OccupancyMatrix& n0);

/// Sparse entries and occupancies of an integer flow table.
FlowPlan make_plan(int depth, double step, const std::vector<std::vector<std::int64_t>>& flows,
                   const OccupancyMatrix& n0);

void write_plan_json(std::ostream& out, const FlowPlan& plan);
FlowPlan read_plan_json(std::istream& in);

}  // namespace spatel
