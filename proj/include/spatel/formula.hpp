#pragma once

#include <memory>
#include <string>
#include <vector>

#include "spatel/qts.hpp"

namespace spatel {

enum class Cmp { Ge, Le };

/// Spatial (tree) formula. An immutable, cheaply copyable handle; copies share
/// the same node, so identity() is stable across copies.
class Tssl {
 public:
  enum class Kind { True, Pred, Not, And, Or, ExistsNext, ForallNext, ExistsUntil, ForallUntil };

  static Tssl top();
  static Tssl pred(Cmp op, double threshold);
  static Tssl negate(Tssl f);
  /// A single operand is returned unchanged.
  static Tssl conj(std::vector<Tssl> fs);
  static Tssl disj(std::vector<Tssl> fs);
  static Tssl exists_next(LabelSet b, Tssl f);
  static Tssl forall_next(LabelSet b, Tssl f);
  static Tssl exists_until(LabelSet b, int kappa, Tssl lhs, Tssl rhs);
  static Tssl forall_until(LabelSet b, int kappa, Tssl lhs, Tssl rhs);

  Kind kind() const;
  Cmp cmp() const;
  double threshold() const;
  LabelSet labels() const;
  int bound() const;
  const std::vector<Tssl>& children() const;
  const Tssl& child(std::size_t i) const { return children().at(i); }
  const void* identity() const { return node_.get(); }

  friend bool operator==(const Tssl& a, const Tssl& b);

 private:
  struct Node;
  explicit Tssl(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Half-open time interval [begin, end) in seconds.
struct Interval {
  double begin = 0;
  double end = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Temporal formula over a QTS signal. Constructors keep the tree canonical:
/// a boolean combination of purely spatial operands becomes a spatial leaf, so
/// printing and re-parsing is the identity.
class Spatel {
 public:
  enum class Kind { Tssl, Not, And, Or, Eventually, Always, Until };

  static Spatel spatial(Tssl f);
  static Spatel negate(Spatel f);
  static Spatel conj(std::vector<Spatel> fs);
  static Spatel disj(std::vector<Spatel> fs);
  static Spatel eventually(Interval i, Spatel f);
  static Spatel always(Interval i, Spatel f);
  static Spatel until(Interval i, Spatel lhs, Spatel rhs);

  Kind kind() const;
  const Tssl& tssl() const;
  Interval interval() const;
  const std::vector<Spatel>& children() const;
  const Spatel& child(std::size_t i) const { return children().at(i); }
  const void* identity() const { return node_.get(); }

  friend bool operator==(const Spatel& a, const Spatel& b);

 private:
  struct Node;
  explicit Spatel(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Concrete syntax accepted by parse().
std::string to_string(const Tssl& f);
std::string to_string(const Spatel& f);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace spatel
