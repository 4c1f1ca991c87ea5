#include "spatel/formula.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace spatel {

struct Tssl::Node {
  Kind kind = Kind::True;
  Cmp cmp = Cmp::Ge;
  double threshold = 0;
  LabelSet labels;
  int bound = 0;
  std::vector<Tssl> children;
};

struct Spatel::Node {
  Kind kind = Kind::Tssl;
  std::vector<Tssl> leaf;  // exactly one element when kind == Tssl
  Interval interval;
  std::vector<Spatel> children;
};

namespace {

void require_labels(LabelSet b) {
  if (b.empty()) throw std::invalid_argument("spatial operator needs a non-empty label set");
}

void require_interval(Interval i) {
  if (!std::isfinite(i.begin) || !std::isfinite(i.end) || i.begin < 0 || !(i.begin < i.end))
    throw std::invalid_argument("malformed interval [" + format_number(i.begin) + "," +
                                format_number(i.end) + ")");
}

}  // namespace

// --- Tssl -------------------------------------------------------------------

Tssl Tssl::top() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::True;
  return Tssl(std::move(n));
}

Tssl Tssl::pred(Cmp op, double threshold) {
  if (!std::isfinite(threshold)) throw std::invalid_argument("predicate threshold must be finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pred;
  n->cmp = op;
  n->threshold = threshold;
  return Tssl(std::move(n));
}

Tssl Tssl::negate(Tssl f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->children.push_back(std::move(f));
  return Tssl(std::move(n));
}

Tssl Tssl::conj(std::vector<Tssl> fs) {
  if (fs.empty()) throw std::invalid_argument("conjunction needs an operand");
  if (fs.size() == 1) return fs.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->children = std::move(fs);
  return Tssl(std::move(n));
}

Tssl Tssl::disj(std::vector<Tssl> fs) {
  if (fs.empty()) throw std::invalid_argument("disjunction needs an operand");
  if (fs.size() == 1) return fs.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->children = std::move(fs);
  return Tssl(std::move(n));
}

Tssl Tssl::exists_next(LabelSet b, Tssl f) {
  require_labels(b);
  auto n = std::make_shared<Node>();
  n->kind = Kind::ExistsNext;
  n->labels = b;
  n->children.push_back(std::move(f));
  return Tssl(std::move(n));
}

Tssl Tssl::forall_next(LabelSet b, Tssl f) {
  require_labels(b);
  auto n = std::make_shared<Node>();
  n->kind = Kind::ForallNext;
  n->labels = b;
  n->children.push_back(std::move(f));
  return Tssl(std::move(n));
}

Tssl Tssl::exists_until(LabelSet b, int kappa, Tssl lhs, Tssl rhs) {
  require_labels(b);
  if (kappa < 1) throw std::invalid_argument("spatial until bound must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::ExistsUntil;
  n->labels = b;
  n->bound = kappa;
  n->children = {std::move(lhs), std::move(rhs)};
  return Tssl(std::move(n));
}

Tssl Tssl::forall_until(LabelSet b, int kappa, Tssl lhs, Tssl rhs) {
  require_labels(b);
  if (kappa < 1) throw std::invalid_argument("spatial until bound must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::ForallUntil;
  n->labels = b;
  n->bound = kappa;
  n->children = {std::move(lhs), std::move(rhs)};
  return Tssl(std::move(n));
}

Tssl::Kind Tssl::kind() const { return node_->kind; }
Cmp Tssl::cmp() const { return node_->cmp; }
double Tssl::threshold() const { return node_->threshold; }
LabelSet Tssl::labels() const { return node_->labels; }
int Tssl::bound() const { return node_->bound; }
const std::vector<Tssl>& Tssl::children() const { return node_->children; }

bool operator==(const Tssl& a, const Tssl& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Tssl::Kind::True: return true;
    case Tssl::Kind::Pred: return x.cmp == y.cmp && x.threshold == y.threshold;
    case Tssl::Kind::ExistsUntil:
    case Tssl::Kind::ForallUntil:
      if (x.bound != y.bound) return false;
      [[fallthrough]];
    case Tssl::Kind::ExistsNext:
    case Tssl::Kind::ForallNext:
      if (x.labels != y.labels) return false;
      break;
    default: break;
  }
  return x.children == y.children;
}

// --- Spatel -----------------------------------------------------------------

Spatel Spatel::spatial(Tssl f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Tssl;
  n->leaf.push_back(std::move(f));
  return Spatel(std::move(n));
}

Spatel Spatel::negate(Spatel f) {
  if (f.kind() == Kind::Tssl) return spatial(Tssl::negate(f.tssl()));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->children.push_back(std::move(f));
  return Spatel(std::move(n));
}

namespace {

bool all_spatial(const std::vector<Spatel>& fs) {
  for (const auto& f : fs)
    if (f.kind() != Spatel::Kind::Tssl) return false;
  return true;
}

std::vector<Tssl> leaves_of(const std::vector<Spatel>& fs) {
  std::vector<Tssl> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(f.tssl());
  return out;
}

}  // namespace

Spatel Spatel::conj(std::vector<Spatel> fs) {
  if (fs.empty()) throw std::invalid_argument("conjunction needs an operand");
  if (fs.size() == 1) return fs.front();
  if (all_spatial(fs)) return spatial(Tssl::conj(leaves_of(fs)));
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->children = std::move(fs);
  return Spatel(std::move(n));
}

Spatel Spatel::disj(std::vector<Spatel> fs) {
  if (fs.empty()) throw std::invalid_argument("disjunction needs an operand");
  if (fs.size() == 1) return fs.front();
  if (all_spatial(fs)) return spatial(Tssl::disj(leaves_of(fs)));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->children = std::move(fs);
  return Spatel(std::move(n));
}

Spatel Spatel::eventually(Interval i, Spatel f) {
  require_interval(i);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Eventually;
  n->interval = i;
  n->children.push_back(std::move(f));
  return Spatel(std::move(n));
}

Spatel Spatel::always(Interval i, Spatel f) {
  require_interval(i);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Always;
  n->interval = i;
  n->children.push_back(std::move(f));
  return Spatel(std::move(n));
}

Spatel Spatel::until(Interval i, Spatel lhs, Spatel rhs) {
  require_interval(i);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Until;
  n->interval = i;
  n->children = {std::move(lhs), std::move(rhs)};
  return Spatel(std::move(n));
}

Spatel::Kind Spatel::kind() const { return node_->kind; }

const Tssl& Spatel::tssl() const {
  if (node_->kind != Kind::Tssl) throw std::logic_error("not a spatial leaf");
  return node_->leaf.front();
}

Interval Spatel::interval() const { return node_->interval; }
const std::vector<Spatel>& Spatel::children() const { return node_->children; }

bool operator==(const Spatel& a, const Spatel& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  if (x.kind == Spatel::Kind::Tssl) return x.leaf.front() == y.leaf.front();
  if (x.kind == Spatel::Kind::Eventually || x.kind == Spatel::Kind::Always ||
      x.kind == Spatel::Kind::Until) {
    if (!(x.interval == y.interval)) return false;
  }
  return x.children == y.children;
}

// --- printing ---------------------------------------------------------------

std::string format_number(double v) {
  if (v == 0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// Binding strength used for parenthesization; matches the parser.
constexpr int kUntilLevel = 0;
constexpr int kOrLevel = 1;
constexpr int kAndLevel = 2;
constexpr int kUnaryLevel = 3;
constexpr int kAtomLevel = 4;

int level(const Tssl& f) {
  switch (f.kind()) {
    case Tssl::Kind::Or: return kOrLevel;
    case Tssl::Kind::And: return kAndLevel;
    case Tssl::Kind::True:
    case Tssl::Kind::Pred: return kAtomLevel;
    default: return kUnaryLevel;
  }
}

int level(const Spatel& f) {
  switch (f.kind()) {
    case Spatel::Kind::Tssl: return level(f.tssl());
    case Spatel::Kind::Until: return kUntilLevel;
    case Spatel::Kind::Or: return kOrLevel;
    case Spatel::Kind::And: return kAndLevel;
    default: return kUnaryLevel;
  }
}

template <class F>
std::string wrapped(const F& f, int min_level) {
  std::string s = to_string(f);
  return level(f) < min_level ? "(" + s + ")" : s;
}

std::string interval_text(Interval i) {
  return "[" + format_number(i.begin) + "," + format_number(i.end) + ")";
}

template <class F>
std::string join(const std::vector<F>& fs, const char* op, int self_level) {
  std::string out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += op;
    out += wrapped(fs[i], self_level + 1);
  }
  return out;
}

}  // namespace

std::string to_string(const Tssl& f) {
  switch (f.kind()) {
    case Tssl::Kind::True: return "true";
    case Tssl::Kind::Pred:
      return std::string("mu ") + (f.cmp() == Cmp::Ge ? ">=" : "<=") + " " +
             format_number(f.threshold());
    case Tssl::Kind::Not: return "!" + wrapped(f.child(0), kUnaryLevel);
    case Tssl::Kind::And: return join(f.children(), " & ", kAndLevel);
    case Tssl::Kind::Or: return join(f.children(), " | ", kOrLevel);
    case Tssl::Kind::ExistsNext:
    case Tssl::Kind::ForallNext:
      return std::string(f.kind() == Tssl::Kind::ExistsNext ? "E[" : "A[") +
             f.labels().to_string() + "] O " + wrapped(f.child(0), kUnaryLevel);
    case Tssl::Kind::ExistsUntil:
    case Tssl::Kind::ForallUntil:
      return std::string(f.kind() == Tssl::Kind::ExistsUntil ? "E[" : "A[") +
             f.labels().to_string() + "] (" + wrapped(f.child(0), kOrLevel) + " U[" +
             std::to_string(f.bound()) + "] " + wrapped(f.child(1), kOrLevel) + ")";
  }
  return "?";
}

std::string to_string(const Spatel& f) {
  switch (f.kind()) {
    case Spatel::Kind::Tssl: return to_string(f.tssl());
    case Spatel::Kind::Not: return "!" + wrapped(f.child(0), kUnaryLevel);
    case Spatel::Kind::And: return join(f.children(), " & ", kAndLevel);
    case Spatel::Kind::Or: return join(f.children(), " | ", kOrLevel);
    case Spatel::Kind::Eventually:
      return "F" + interval_text(f.interval()) + " " + wrapped(f.child(0), kUnaryLevel);
    case Spatel::Kind::Always:
      return "G" + interval_text(f.interval()) + " " + wrapped(f.child(0), kUnaryLevel);
    case Spatel::Kind::Until:
      return wrapped(f.child(0), kUntilLevel + 1) + " U" + interval_text(f.interval()) + " " +
             wrapped(f.child(1), kUntilLevel + 1);
  }
  return "?";
}

}  // namespace spatel
