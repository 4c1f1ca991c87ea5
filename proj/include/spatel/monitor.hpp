#pragma once

#include <stdexcept>
#include <vector>

#include "spatel/formula.hpp"
#include "spatel/qts.hpp"

namespace spatel {

/// Discrete-time QTS signal: frame k is the tree at time k * step.
class QtsSignal {
 public:
  QtsSignal(std::vector<Qts> frames, double step);
  static QtsSignal from_occupancy(const std::vector<OccupancyMatrix>& frames, double step);

  int last_step() const { return static_cast<int>(frames_.size()) - 1; }
  double step() const { return step_; }
  const Qts& frame(int k) const { return frames_.at(static_cast<std::size_t>(k)); }

 private:
  std::vector<Qts> frames_;
  double step_;
};

class SignalTooShort : public std::out_of_range {
 public:
  SignalTooShort(int first_missing, int last_needed);
  int first_missing() const { return first_missing_; }
  int last_needed() const { return last_needed_; }

 private:
  int first_missing_;
  int last_needed_;
};

/// Spatial robustness at node v.
double tssl_robustness(const Tssl& f, const Qts& q, NodeId v);

/// Spatial robustness at every node at once, indexed by NodeId.
std::vector<double> tssl_robustness_all(const Tssl& f, const Qts& q);

/// Temporal robustness from step k; throws SignalTooShort when the formula
/// needs frames beyond the signal.
double spatel_robustness(const Spatel& f, const QtsSignal& s, int k = 0);

enum class Verdict { Sat, Unsat, Boundary };
const char* to_string(Verdict v);

/// Zero robustness is reported as its own verdict.
Verdict verdict_of(double robustness);
Verdict satisfies(const Spatel& f, const QtsSignal& s, int k = 0);

}  // namespace spatel
