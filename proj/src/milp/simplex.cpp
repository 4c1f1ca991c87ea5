#include "spatel/milp/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace spatel::milp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDrop = 1e-12;
constexpr int kDegenerateLimit = 200;
}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Cutoff: return "cutoff";
    case LpStatus::Limit: return "limit";
  }
  return "?";
}

DualSimplex::DualSimplex(const Model& model, const simd::Kernels& kernels)
    : k_(&kernels), n_(model.var_count()), m_(model.constraint_count()) {
  stride_ = (static_cast<std::size_t>(n_) + 3) / 4 * 4;
  tab_.assign(static_cast<std::size_t>(m_) * stride_, 0.0);
  const int total = n_ + m_;
  cost_.assign(total, 0.0);
  lo_.resize(total);
  hi_.resize(total);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = model.vars()[j].lower;
    hi_[j] = model.vars()[j].upper;
  }
  for (const auto& t : model.objective().terms()) cost_[t.var.index] += t.coef;
  for (int i = 0; i < m_; ++i) {
    const auto& c = model.constraint(i);
    double* r = row(i);
    for (const auto& t : c.terms) r[t.var.index] = -t.coef;
    lo_[n_ + i] = c.sense == Sense::Le ? -kInf : c.rhs;
    hi_[n_ + i] = c.sense == Sense::Ge ? kInf : c.rhs;
  }
  nonbasic_.resize(n_);
  basic_.resize(m_);
  where_.resize(total);
  is_basic_.assign(total, 0);
  at_upper_.assign(total, 0);
  d_.assign(stride_, 0.0);
  for (int j = 0; j < n_; ++j) {
    nonbasic_[j] = j;
    where_[j] = j;
    at_upper_[j] = cost_[j] < 0;
    d_[j] = cost_[j];
  }
  xb_.assign(m_, 0.0);
  lob_.resize(m_);
  hib_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    basic_[i] = n_ + i;
    where_[n_ + i] = i;
    is_basic_[n_ + i] = 1;
    lob_[i] = lo_[n_ + i];
    hib_[i] = hi_[n_ + i];
    const double* r = row(i);
    double s = 0;
    for (int j = 0; j < n_; ++j)
      if (r[j] != 0) s -= r[j] * nonbasic_value(j);
    xb_[i] = s;
  }
}

void DualSimplex::shift_nonbasic(int col, double delta) {
  if (delta == 0) return;
  for (int i = 0; i < m_; ++i) {
    const double t = row(i)[col];
    if (t != 0) xb_[i] -= t * delta;
  }
}

void DualSimplex::set_bounds(int j, double lower, double upper) {
  if (j < 0 || j >= n_) throw ModelError("set_bounds: not a structural variable");
  if (!(lower <= upper)) throw ModelError("set_bounds: empty interval");
  if (is_basic_[j]) {
    lo_[j] = lower;
    hi_[j] = upper;
    lob_[where_[j]] = lower;
    hib_[where_[j]] = upper;
    return;
  }
  const double before = nonbasic_value(j);
  lo_[j] = lower;
  hi_[j] = upper;
  shift_nonbasic(where_[j], nonbasic_value(j) - before);
}

void DualSimplex::repair_dual_signs() {
  for (int c = 0; c < n_; ++c) {
    const int v = nonbasic_[c];
    if (lo_[v] == hi_[v]) continue;
    if (!at_upper_[v] && d_[c] < -kDualTol && std::isfinite(hi_[v])) {
      at_upper_[v] = 1;
      shift_nonbasic(c, hi_[v] - lo_[v]);
    } else if (at_upper_[v] && d_[c] > kDualTol && std::isfinite(lo_[v])) {
      at_upper_[v] = 0;
      shift_nonbasic(c, lo_[v] - hi_[v]);
    }
  }
}

double DualSimplex::objective() const {
  double z = 0;
  for (int j = 0; j < n_; ++j) {
    if (cost_[j] == 0) continue;
    z += cost_[j] * (is_basic_[j] ? xb_[where_[j]] : nonbasic_value(j));
  }
  return z;
}

std::vector<double> DualSimplex::values() const {
  std::vector<double> x(n_);
  for (int j = 0; j < n_; ++j) x[j] = is_basic_[j] ? xb_[where_[j]] : nonbasic_value(j);
  return x;
}

int DualSimplex::choose_leaving(bool bland) const {
  if (m_ == 0) return -1;
  if (!bland) {
    const auto v = k_->max_violation(xb_.data(), lob_.data(), hib_.data(), static_cast<std::size_t>(m_));
    return v.amount > kPrimalTol ? static_cast<int>(v.index) : -1;
  }
  int best = -1;
  for (int i = 0; i < m_; ++i) {
    if (xb_[i] < lob_[i] - kPrimalTol || xb_[i] > hib_[i] + kPrimalTol)
      if (best < 0 || basic_[i] < basic_[best]) best = i;
  }
  return best;
}

int DualSimplex::choose_entering(int r, bool increase, bool bland) const {
  const double* t = row(r);
  const double s = increase ? 1.0 : -1.0;
  auto eligible = [&](int c, double& a, double& dj) {
    const int v = nonbasic_[c];
    if (lo_[v] == hi_[v]) return false;
    a = -s * t[c];
    if (!at_upper_[v] && a > kPivotTol) {
      dj = std::max(d_[c], 0.0);
      return true;
    }
    if (at_upper_[v] && a < -kPivotTol) {
      dj = std::max(-d_[c], 0.0);
      return true;
    }
    return false;
  };

  int best = -1;
  if (bland) {
    double best_ratio = kInf;
    for (int c = 0; c < n_; ++c) {
      double a, dj;
      if (!eligible(c, a, dj)) continue;
      const double ratio = dj / std::abs(a);
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && (best < 0 || nonbasic_[c] < nonbasic_[best]))) {
        best_ratio = std::min(best_ratio, ratio);
        best = c;
      }
    }
    return best;
  }

  // Harris two-pass: relaxed bound first, then the largest pivot under it.
  double theta = kInf;
  for (int c = 0; c < n_; ++c) {
    double a, dj;
    if (eligible(c, a, dj)) theta = std::min(theta, (dj + kDualTol) / std::abs(a));
  }
  if (theta == kInf) return -1;
  double best_pivot = 0;
  for (int c = 0; c < n_; ++c) {
    double a, dj;
    if (!eligible(c, a, dj)) continue;
    if (dj / std::abs(a) <= theta && std::abs(a) > best_pivot) {
      best_pivot = std::abs(a);
      best = c;
    }
  }
  return best;
}

void DualSimplex::pivot(int r, int q, double target) {
  double* pr = row(r);
  const double p = pr[q];
  const int enter = nonbasic_[q];
  const int leave = basic_[r];
  const double delta = (xb_[r] - target) / p;
  const double enter_value = nonbasic_value(enter) + delta;

  std::vector<double> col(m_);
  for (int i = 0; i < m_; ++i) {
    col[i] = row(i)[q];
    if (col[i] != 0) xb_[i] -= col[i] * delta;
  }
  xb_[r] = enter_value;

  const auto n = stride_;
  k_->scale(pr, 1.0 / p, n);
  // A sparse pivot row only touches its nonzero columns; skipping the zero
  // ones gives the same values as the dense kernel.
  nz_.clear();
  for (std::size_t c = 0; c < n; ++c)
    if (pr[c] != 0) nz_.push_back(c);
  const bool sparse = nz_.size() * 4 < n;
  auto update = [&](double* y, double a) {
    if (!sparse) {
      k_->axpy_drop(y, pr, a, n, kDrop);
      return;
    }
    for (std::size_t c : nz_) {
      const double v = y[c] + a * pr[c];
      y[c] = std::fabs(v) < kDrop ? 0.0 : v;
    }
  };
  for (int i = 0; i < m_; ++i) {
    if (i == r || col[i] == 0) continue;
    double* ri = row(i);
    update(ri, -col[i]);
    ri[q] = -col[i] / p;
  }
  const double dq = d_[q];
  if (dq != 0) update(d_.data(), -dq);
  d_[q] = -dq / p;
  pr[q] = 1.0 / p;

  basic_[r] = enter;
  nonbasic_[q] = leave;
  where_[enter] = r;
  where_[leave] = q;
  is_basic_[enter] = 1;
  is_basic_[leave] = 0;
  at_upper_[leave] = target == hi_[leave] && target != lo_[leave];
  lob_[r] = lo_[enter];
  hib_[r] = hi_[enter];
}

LpStatus DualSimplex::solve(const LpLimits& limits) {
  repair_dual_signs();
  double obj = objective();
  int degenerate = 0;
  bool bland = false;
  const double cutoff_tol = 1e-9 * (1 + std::abs(limits.cutoff));
  for (long it = 0;; ++it) {
    if (obj > limits.cutoff + cutoff_tol) {
      // Confirm against the exact value before giving up on the node.
      obj = objective();
      if (obj > limits.cutoff + cutoff_tol) return LpStatus::Cutoff;
    }
    if (limits.max_iterations >= 0 && it >= limits.max_iterations) return LpStatus::Limit;
    if ((it & 31) == 0) {
      if (limits.cancel && limits.cancel->load(std::memory_order_relaxed)) return LpStatus::Limit;
      if (limits.deadline != std::chrono::steady_clock::time_point::max() &&
          std::chrono::steady_clock::now() > limits.deadline)
        return LpStatus::Limit;
    }
    const int r = choose_leaving(bland);
    if (r < 0) return LpStatus::Optimal;
    const bool increase = xb_[r] < lob_[r];
    const double target = increase ? lob_[r] : hib_[r];
    const int q = choose_entering(r, increase, bland);
    if (q < 0) return LpStatus::Infeasible;
    const double before = obj;
    const double dq = d_[q];
    const double delta = (xb_[r] - target) / row(r)[q];
    pivot(r, q, target);
    obj += dq * delta;
    ++iterations_;
    if (obj - before <= 1e-12 * (1 + std::abs(obj))) {
      if (++degenerate > kDegenerateLimit) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
    if ((iterations_ & 255) == 0) obj = objective();
  }
}

}  // namespace spatel::milp
