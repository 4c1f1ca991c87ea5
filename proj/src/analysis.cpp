#include "spatel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spatel {

double horizon(const Spatel& f) {
  switch (f.kind()) {
    case Spatel::Kind::Tssl: return 0.0;
    case Spatel::Kind::Not: return horizon(f.child(0));
    case Spatel::Kind::And:
    case Spatel::Kind::Or: {
      double h = 0;
      for (const auto& c : f.children()) h = std::max(h, horizon(c));
      return h;
    }
    case Spatel::Kind::Eventually:
    case Spatel::Kind::Always: return f.interval().end + horizon(f.child(0));
    case Spatel::Kind::Until:
      return f.interval().end + std::max(horizon(f.child(0)), horizon(f.child(1)));
  }
  return 0.0;
}

int to_steps(double t, double step) {
  if (!(step > 0)) throw std::invalid_argument("step must be positive");
  const double q = t / step;
  const double n = std::round(q);
  if (t < 0 || std::abs(n * step - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw std::invalid_argument("time " + format_number(t) + " is not a multiple of step " +
                                format_number(step));
  return static_cast<int>(n);
}

StepWindow step_window(Interval i, double step, int k) {
  return StepWindow{k + to_steps(i.begin, step), k + to_steps(i.end, step)};
}

namespace {

int touched_offset(const Spatel& f, double step) {
  switch (f.kind()) {
    case Spatel::Kind::Tssl: return 0;
    case Spatel::Kind::Not: return touched_offset(f.child(0), step);
    case Spatel::Kind::And:
    case Spatel::Kind::Or: {
      int m = 0;
      for (const auto& c : f.children()) m = std::max(m, touched_offset(c, step));
      return m;
    }
    case Spatel::Kind::Eventually:
    case Spatel::Kind::Always: {
      const auto w = step_window(f.interval(), step, 0);
      return w.last - 1 + touched_offset(f.child(0), step);
    }
    case Spatel::Kind::Until: {
      const auto w = step_window(f.interval(), step, 0);
      int m = w.last - 1 + touched_offset(f.child(1), step);
      // The left operand is only needed strictly before the chosen step.
      if (w.last - 2 >= w.first) m = std::max(m, w.last - 2 + touched_offset(f.child(0), step));
      return m;
    }
  }
  return 0;
}

}  // namespace

int max_step_touched(const Spatel& f, double step) { return touched_offset(f, step); }

bool is_nnf(const Tssl& f) {
  if (f.kind() == Tssl::Kind::Not) {
    const auto k = f.child(0).kind();
    return k == Tssl::Kind::Pred || k == Tssl::Kind::True;
  }
  for (const auto& c : f.children())
    if (!is_nnf(c)) return false;
  return true;
}

bool is_nnf(const Spatel& f) {
  if (f.kind() == Spatel::Kind::Tssl) return is_nnf(f.tssl());
  if (f.kind() == Spatel::Kind::Not) return false;  // spatial negations live in the leaf
  for (const auto& c : f.children())
    if (!is_nnf(c)) return false;
  return true;
}

// sup over paths of min(phi2(pi_i), inf_{j<i} phi1(pi_j)) satisfies
//   g_1 = phi1 & E O phi2,  g_k = phi1 & E O (phi2 | g_{k-1}),
// and the universal version the same with A O in place of E O (the shared
// phi1(v) factor pulls out of the sup over i on every path).
Tssl unroll_spatial_until(const Tssl& f) {
  if (f.kind() != Tssl::Kind::ExistsUntil && f.kind() != Tssl::Kind::ForallUntil)
    throw std::invalid_argument("not a spatial until");
  const bool exists = f.kind() == Tssl::Kind::ExistsUntil;
  const Tssl& lhs = f.child(0);
  const Tssl& rhs = f.child(1);
  auto next = [&](Tssl body) {
    return exists ? Tssl::exists_next(f.labels(), std::move(body))
                  : Tssl::forall_next(f.labels(), std::move(body));
  };
  Tssl acc = Tssl::conj({lhs, next(rhs)});
  for (int k = 2; k <= f.bound(); ++k) {
    acc = Tssl::conj({lhs, next(Tssl::disj({rhs, acc}))});
  }
  return acc;
}

namespace {

Tssl nnf_tssl(const Tssl& f, bool neg) {
  switch (f.kind()) {
    case Tssl::Kind::True:
    case Tssl::Kind::Pred: return neg ? Tssl::negate(f) : f;
    case Tssl::Kind::Not: return nnf_tssl(f.child(0), !neg);
    case Tssl::Kind::And:
    case Tssl::Kind::Or: {
      std::vector<Tssl> cs;
      for (const auto& c : f.children()) cs.push_back(nnf_tssl(c, neg));
      const bool conj = (f.kind() == Tssl::Kind::And) != neg;
      return conj ? Tssl::conj(std::move(cs)) : Tssl::disj(std::move(cs));
    }
    case Tssl::Kind::ExistsNext:
    case Tssl::Kind::ForallNext: {
      Tssl body = nnf_tssl(f.child(0), neg);
      const bool exists = (f.kind() == Tssl::Kind::ExistsNext) != neg;
      return exists ? Tssl::exists_next(f.labels(), std::move(body))
                    : Tssl::forall_next(f.labels(), std::move(body));
    }
    case Tssl::Kind::ExistsUntil:
    case Tssl::Kind::ForallUntil:
      if (neg) return nnf_tssl(unroll_spatial_until(f), true);
      {
        Tssl lhs = nnf_tssl(f.child(0), false);
        Tssl rhs = nnf_tssl(f.child(1), false);
        return f.kind() == Tssl::Kind::ExistsUntil
                   ? Tssl::exists_until(f.labels(), f.bound(), std::move(lhs), std::move(rhs))
                   : Tssl::forall_until(f.labels(), f.bound(), std::move(lhs), std::move(rhs));
      }
  }
  return f;
}

// Phi1 U_[a,b) Phi2 == OR_{m=a}^{b-1} (F_[m,m+1) Phi2 & G_[a,m) Phi1) on the step grid.
Spatel unroll_temporal_until(const Spatel& f, double step) {
  const auto w = step_window(f.interval(), step, 0);
  std::vector<Spatel> terms;
  for (int m = w.first; m < w.last; ++m) {
    Spatel hit = Spatel::eventually(Interval{m * step, (m + 1) * step}, f.child(1));
    if (m == w.first) {
      terms.push_back(std::move(hit));
    } else {
      terms.push_back(
          Spatel::conj({std::move(hit), Spatel::always(Interval{w.first * step, m * step}, f.child(0))}));
    }
  }
  return Spatel::disj(std::move(terms));
}

Spatel nnf_spatel(const Spatel& f, bool neg, std::optional<double> step) {
  switch (f.kind()) {
    case Spatel::Kind::Tssl: return Spatel::spatial(nnf_tssl(f.tssl(), neg));
    case Spatel::Kind::Not: return nnf_spatel(f.child(0), !neg, step);
    case Spatel::Kind::And:
    case Spatel::Kind::Or: {
      std::vector<Spatel> cs;
      for (const auto& c : f.children()) cs.push_back(nnf_spatel(c, neg, step));
      const bool conj = (f.kind() == Spatel::Kind::And) != neg;
      return conj ? Spatel::conj(std::move(cs)) : Spatel::disj(std::move(cs));
    }
    case Spatel::Kind::Eventually:
    case Spatel::Kind::Always: {
      Spatel body = nnf_spatel(f.child(0), neg, step);
      const bool eventually = (f.kind() == Spatel::Kind::Eventually) != neg;
      return eventually ? Spatel::eventually(f.interval(), std::move(body))
                        : Spatel::always(f.interval(), std::move(body));
    }
    case Spatel::Kind::Until:
      if (neg) {
        if (!step)
          throw std::invalid_argument("negated temporal until needs the time step to normalize");
        return nnf_spatel(unroll_temporal_until(f, *step), true, step);
      }
      return Spatel::until(f.interval(), nnf_spatel(f.child(0), false, step),
                           nnf_spatel(f.child(1), false, step));
  }
  return f;
}

void collect_sites(const Tssl& f, std::vector<int>& path, bool negated,
                   std::vector<PredicateSite>& out) {
  switch (f.kind()) {
    case Tssl::Kind::Pred:
      out.push_back(PredicateSite{path, f.cmp(), f.threshold(), negated, polarity_of(f.cmp(), negated)});
      return;
    case Tssl::Kind::True: return;
    case Tssl::Kind::Not:
      path.push_back(0);
      collect_sites(f.child(0), path, !negated, out);
      path.pop_back();
      return;
    default:
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        path.push_back(static_cast<int>(i));
        collect_sites(f.child(i), path, negated, out);
        path.pop_back();
      }
  }
}

void collect_sites(const Spatel& f, std::vector<int>& path, std::vector<PredicateSite>& out) {
  if (f.kind() == Spatel::Kind::Tssl) {
    collect_sites(f.tssl(), path, false, out);
    return;
  }
  for (std::size_t i = 0; i < f.children().size(); ++i) {
    path.push_back(static_cast<int>(i));
    collect_sites(f.child(i), path, out);
    path.pop_back();
  }
}

Tssl rebuild_with(const Tssl& f, const std::vector<Tssl>& cs) {
  switch (f.kind()) {
    case Tssl::Kind::Not: return Tssl::negate(cs[0]);
    case Tssl::Kind::And: return Tssl::conj(cs);
    case Tssl::Kind::Or: return Tssl::disj(cs);
    case Tssl::Kind::ExistsNext: return Tssl::exists_next(f.labels(), cs[0]);
    case Tssl::Kind::ForallNext: return Tssl::forall_next(f.labels(), cs[0]);
    case Tssl::Kind::ExistsUntil: return Tssl::exists_until(f.labels(), f.bound(), cs[0], cs[1]);
    case Tssl::Kind::ForallUntil: return Tssl::forall_until(f.labels(), f.bound(), cs[0], cs[1]);
    default: return f;
  }
}

Tssl replace_in(const Tssl& f, const std::vector<int>& path, std::size_t depth, double c) {
  if (depth == path.size()) {
    if (f.kind() != Tssl::Kind::Pred) throw std::invalid_argument("path does not end at a predicate");
    return Tssl::pred(f.cmp(), c);
  }
  std::vector<Tssl> cs = f.children();
  const auto idx = static_cast<std::size_t>(path[depth]);
  if (idx >= cs.size()) throw std::invalid_argument("path out of range");
  cs[idx] = replace_in(cs[idx], path, depth + 1, c);
  return rebuild_with(f, cs);
}

Spatel replace_in(const Spatel& f, const std::vector<int>& path, std::size_t depth, double c) {
  if (f.kind() == Spatel::Kind::Tssl) return Spatel::spatial(replace_in(f.tssl(), path, depth, c));
  if (depth == path.size()) throw std::invalid_argument("path does not end at a predicate");
  std::vector<Spatel> cs = f.children();
  const auto idx = static_cast<std::size_t>(path[depth]);
  if (idx >= cs.size()) throw std::invalid_argument("path out of range");
  cs[idx] = replace_in(cs[idx], path, depth + 1, c);
  switch (f.kind()) {
    case Spatel::Kind::Not: return Spatel::negate(cs[0]);
    case Spatel::Kind::And: return Spatel::conj(cs);
    case Spatel::Kind::Or: return Spatel::disj(cs);
    case Spatel::Kind::Eventually: return Spatel::eventually(f.interval(), cs[0]);
    case Spatel::Kind::Always: return Spatel::always(f.interval(), cs[0]);
    case Spatel::Kind::Until: return Spatel::until(f.interval(), cs[0], cs[1]);
    default: return f;
  }
}

double max_abs(const Tssl& f) {
  double m = f.kind() == Tssl::Kind::Pred ? std::abs(f.threshold()) : 0.0;
  for (const auto& c : f.children()) m = std::max(m, max_abs(c));
  return m;
}

}  // namespace

Spatel to_nnf(const Spatel& f, std::optional<double> step) { return nnf_spatel(f, false, step); }
Tssl to_nnf(const Tssl& f) { return nnf_tssl(f, false); }

Polarity polarity_of(Cmp cmp, bool negated) {
  const bool ge = cmp == Cmp::Ge;
  return ge != negated ? Polarity::NonIncreasing : Polarity::NonDecreasing;
}

std::vector<PredicateSite> predicate_sites(const Spatel& f) {
  if (!is_nnf(f)) throw std::invalid_argument("predicate_sites needs a formula in negation normal form");
  std::vector<PredicateSite> out;
  std::vector<int> path;
  collect_sites(f, path, out);
  return out;
}

Spatel with_threshold(const Spatel& f, const std::vector<int>& path, double threshold) {
  return replace_in(f, path, 0, threshold);
}

double max_abs_threshold(const Spatel& f) {
  if (f.kind() == Spatel::Kind::Tssl) return max_abs(f.tssl());
  double m = 0;
  for (const auto& c : f.children()) m = std::max(m, max_abs_threshold(c));
  return m;
}

}  // namespace spatel
