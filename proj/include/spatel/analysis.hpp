#pragma once

#include <optional>
#include <vector>

#include "spatel/formula.hpp"

namespace spatel {

/// Longest look-ahead, in seconds, needed to evaluate a formula at one instant.
double horizon(const Spatel& f);

/// Converts a time to a step count; throws std::invalid_argument unless `t` is
/// a non-negative multiple of `step` (relative tolerance 1e-9).
int to_steps(double t, double step);

/// Steps first .. last-1 covered by interval [t1,t2) when evaluated at step k.
/// Monitor and encoder both go through this function.
struct StepWindow {
  int first = 0;
  int last = 0;  // exclusive
};

StepWindow step_window(Interval i, double step, int k);

/// Largest step index any evaluation of `f` from step 0 touches.
int max_step_touched(const Spatel& f, double step);

/// True when every negation sits directly above a predicate or `true`.
bool is_nnf(const Tssl& f);
bool is_nnf(const Spatel& f);

/// Pushes negations down to predicates with exact robustness duals.
/// Negated spatial untils are unrolled into nested next operators. Negated
/// temporal untils are unrolled on the step grid and so need `step`; without
/// it they raise std::invalid_argument.
Spatel to_nnf(const Spatel& f, std::optional<double> step = std::nullopt);
Tssl to_nnf(const Tssl& f);

/// Equivalent next-operator form of a spatial until: with Q its quantifier,
/// g_1 = phi1 & Q O phi2 and g_k = phi1 & Q O (phi2 | g_{k-1}). Robustness is
/// identical at every node.
Tssl unroll_spatial_until(const Tssl& until);

/// Sign class of the robustness derivative with respect to a threshold.
enum class Polarity { NonIncreasing, NonDecreasing };

/// One predicate occurrence. `path` lists child indices from the root, crossing
/// from the temporal into the spatial layer transparently; a negated predicate's
/// path ends at the predicate itself (below the negation).
struct PredicateSite {
  std::vector<int> path;
  Cmp cmp = Cmp::Ge;
  double threshold = 0;
  bool negated = false;
  Polarity polarity = Polarity::NonIncreasing;
};

Polarity polarity_of(Cmp cmp, bool negated);

/// Predicates of an NNF formula in depth-first order; throws on non-NNF input.
std::vector<PredicateSite> predicate_sites(const Spatel& f);

/// Copy of `f` with the predicate at `path` given a new threshold.
Spatel with_threshold(const Spatel& f, const std::vector<int>& path, double threshold);

/// Largest |threshold| over all predicates (0 if none).
double max_abs_threshold(const Spatel& f);

}  // namespace spatel
