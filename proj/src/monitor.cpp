#include "spatel/monitor.hpp"

#include <algorithm>
#include <limits>

#include "spatel/analysis.hpp"

namespace spatel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

QtsSignal::QtsSignal(std::vector<Qts> frames, double step) : frames_(std::move(frames)), step_(step) {
  if (frames_.empty()) throw std::invalid_argument("signal needs at least one frame");
  if (!(step > 0)) throw std::invalid_argument("signal step must be positive");
  for (const auto& q : frames_)
    if (q.depth() != frames_.front().depth())
      throw std::invalid_argument("signal frames must share a depth");
}

QtsSignal QtsSignal::from_occupancy(const std::vector<OccupancyMatrix>& frames, double step) {
  std::vector<Qts> qs;
  qs.reserve(frames.size());
  for (const auto& m : frames) qs.push_back(build_qts(m));
  return QtsSignal(std::move(qs), step);
}

SignalTooShort::SignalTooShort(int first_missing, int last_needed)
    : std::out_of_range("signal too short: steps " + std::to_string(first_missing) + ".." +
                        std::to_string(last_needed) + " are missing"),
      first_missing_(first_missing),
      last_needed_(last_needed) {}

std::vector<double> tssl_robustness_all(const Tssl& f, const Qts& q) {
  const QtsShape& shape = q.shape();
  const int n = shape.node_count();
  std::vector<double> out(n);
  switch (f.kind()) {
    case Tssl::Kind::True: std::fill(out.begin(), out.end(), 1.0); break;
    case Tssl::Kind::Pred:
      for (NodeId v = 0; v < n; ++v)
        out[v] = f.cmp() == Cmp::Ge ? q.value(v) - f.threshold() : f.threshold() - q.value(v);
      break;
    case Tssl::Kind::Not: {
      out = tssl_robustness_all(f.child(0), q);
      for (double& x : out) x = -x;
      break;
    }
    case Tssl::Kind::And:
    case Tssl::Kind::Or: {
      const bool conj = f.kind() == Tssl::Kind::And;
      std::fill(out.begin(), out.end(), conj ? kInf : -kInf);
      for (const auto& c : f.children()) {
        const auto r = tssl_robustness_all(c, q);
        for (NodeId v = 0; v < n; ++v) out[v] = conj ? std::min(out[v], r[v]) : std::max(out[v], r[v]);
      }
      break;
    }
    case Tssl::Kind::ExistsNext:
    case Tssl::Kind::ForallNext: {
      const bool exists = f.kind() == Tssl::Kind::ExistsNext;
      const auto r = tssl_robustness_all(f.child(0), q);
      for (NodeId v = 0; v < n; ++v) {
        double acc = exists ? -kInf : kInf;
        for (NodeId c : shape.successors(v, f.labels()))
          acc = exists ? std::max(acc, r[c]) : std::min(acc, r[c]);
        out[v] = acc;
      }
      break;
    }
    case Tssl::Kind::ExistsUntil:
    case Tssl::Kind::ForallUntil: {
      // Direct sup/inf over materialized labeled paths.
      const bool exists = f.kind() == Tssl::Kind::ExistsUntil;
      const auto r1 = tssl_robustness_all(f.child(0), q);
      const auto r2 = tssl_robustness_all(f.child(1), q);
      const int kappa = f.bound();
      for (NodeId v = 0; v < n; ++v) {
        double acc = exists ? -kInf : kInf;
        for_each_labeled_path(shape, v, f.labels(), kappa, [&](std::span<const NodeId> pi) {
          double prefix = kInf;  // inf over j in [0, i)
          double best = -kInf;   // sup over i
          for (int i = 1; i <= kappa; ++i) {
            prefix = std::min(prefix, r1[pi[i - 1]]);
            best = std::max(best, std::min(r2[pi[i]], prefix));
          }
          acc = exists ? std::max(acc, best) : std::min(acc, best);
        });
        out[v] = acc;
      }
      break;
    }
  }
  return out;
}

double tssl_robustness(const Tssl& f, const Qts& q, NodeId v) {
  if (v < 0 || v >= q.shape().node_count()) throw std::out_of_range("node outside tree");
  return tssl_robustness_all(f, q)[v];
}

namespace {

class Evaluator {
 public:
  explicit Evaluator(const QtsSignal& s) : s_(s) {}

  double eval(const Spatel& f, int k) {
    switch (f.kind()) {
      case Spatel::Kind::Tssl: {
        require(k, k);
        return tssl_robustness_all(f.tssl(), s_.frame(k))[0];
      }
      case Spatel::Kind::Not: return -eval(f.child(0), k);
      case Spatel::Kind::And: {
        double acc = kInf;
        for (const auto& c : f.children()) acc = std::min(acc, eval(c, k));
        return acc;
      }
      case Spatel::Kind::Or: {
        double acc = -kInf;
        for (const auto& c : f.children()) acc = std::max(acc, eval(c, k));
        return acc;
      }
      case Spatel::Kind::Eventually:
      case Spatel::Kind::Always: {
        const bool ev = f.kind() == Spatel::Kind::Eventually;
        const auto w = step_window(f.interval(), s_.step(), k);
        double acc = ev ? -kInf : kInf;
        for (int t = w.first; t < w.last; ++t) {
          const double r = eval(f.child(0), t);
          acc = ev ? std::max(acc, r) : std::min(acc, r);
        }
        return acc;
      }
      case Spatel::Kind::Until: {
        const auto w = step_window(f.interval(), s_.step(), k);
        double acc = -kInf;
        double prefix = kInf;  // inf of the left operand over [first, t)
        for (int t = w.first; t < w.last; ++t) {
          acc = std::max(acc, std::min(eval(f.child(1), t), prefix));
          if (t + 1 < w.last) prefix = std::min(prefix, eval(f.child(0), t));
        }
        return acc;
      }
    }
    return 0;
  }

 private:
  void require(int first, int last) const {
    if (last > s_.last_step()) throw SignalTooShort(std::max(first, s_.last_step() + 1), last);
  }

  const QtsSignal& s_;
};

}  // namespace

double spatel_robustness(const Spatel& f, const QtsSignal& s, int k) {
  if (k < 0) throw std::out_of_range("negative start step");
  const int needed = k + max_step_touched(f, s.step());
  if (needed > s.last_step()) throw SignalTooShort(s.last_step() + 1, needed);
  return Evaluator(s).eval(f, k);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Sat: return "sat";
    case Verdict::Unsat: return "unsat";
    case Verdict::Boundary: return "boundary";
  }
  return "?";
}

Verdict verdict_of(double r) {
  if (r > 0) return Verdict::Sat;
  if (r < 0) return Verdict::Unsat;
  return Verdict::Boundary;
}

Verdict satisfies(const Spatel& f, const QtsSignal& s, int k) {
  return verdict_of(spatel_robustness(f, s, k));
}

}  // namespace spatel
