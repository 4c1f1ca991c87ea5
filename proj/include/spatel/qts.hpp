#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spatel/grid.hpp"

namespace spatel {

/// Directional edge label of a quad tree.
enum class Label : std::uint8_t { NW = 0, NE = 1, SW = 2, SE = 3 };

inline constexpr std::array<Label, 4> kAllLabels = {Label::NW, Label::NE, Label::SW, Label::SE};

const char* to_string(Label l);

/// Non-empty subset of {NW, NE, SW, SE}; iteration follows NW, NE, SW, SE.
class LabelSet {
 public:
  constexpr LabelSet() = default;
  constexpr LabelSet(std::initializer_list<Label> labels) {
    for (Label l : labels) bits_ |= bit(l);
  }
  static constexpr LabelSet all() { return from_bits(0xF); }
  static constexpr LabelSet from_bits(std::uint8_t bits) {
    LabelSet s;
    s.bits_ = bits & 0xF;
    return s;
  }

  constexpr bool contains(Label l) const { return (bits_ & bit(l)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool is_all() const { return bits_ == 0xF; }
  constexpr std::uint8_t bits() const { return bits_; }
  int size() const;
  std::vector<Label> labels() const;

  /// "L" for the full set, otherwise "NW,SE" style.
  std::string to_string() const;

  friend constexpr bool operator==(LabelSet, LabelSet) = default;

 private:
  static constexpr std::uint8_t bit(Label l) { return std::uint8_t(1u << static_cast<int>(l)); }
  std::uint8_t bits_ = 0;
};

using NodeId = int;

/// Topology of the complete quad tree over a 2^D x 2^D grid. Nodes are numbered
/// breadth-first with children in NW, NE, SW, SE order, so the root is 0 and the
/// children of n are 4n+1 .. 4n+4.
class QtsShape {
 public:
  QtsShape() = default;
  explicit QtsShape(int depth);

  int depth() const { return depth_; }
  int node_count() const { return static_cast<int>(level_.size()); }
  NodeId root() const { return 0; }

  int level(NodeId v) const { return level_[v]; }
  bool is_leaf(NodeId v) const { return level_[v] == depth_; }
  NodeId child(NodeId v, Label l) const { return 4 * v + 1 + static_cast<int>(l); }
  NodeId parent(NodeId v) const { return (v - 1) / 4; }

  /// Successors along B-labeled edges; a leaf is its own successor.
  std::vector<NodeId> successors(NodeId v, LabelSet labels) const;

  /// North-west cell of the sub-matrix a node covers and the sub-matrix side.
  Cell corner(NodeId v) const { return corner_[v]; }
  int extent(NodeId v) const { return 1 << (depth_ - level_[v]); }

  NodeId leaf_of(Cell c) const;
  /// Leaves below v, row-major within the covered sub-matrix.
  std::vector<Cell> cells_under(NodeId v) const;

 private:
  int depth_ = 0;
  std::vector<int> level_;
  std::vector<Cell> corner_;
  std::vector<NodeId> leaf_by_cell_;
};

/// Quad transition system: the shape plus the valuation mu of every node.
class Qts {
 public:
  Qts() = default;
  Qts(QtsShape shape, std::vector<double> values);

  const QtsShape& shape() const { return shape_; }
  int depth() const { return shape_.depth(); }
  double value(NodeId v) const { return values_[v]; }
  const std::vector<double>& values() const { return values_; }

 private:
  QtsShape shape_;
  std::vector<double> values_;
};

/// Leaves take the matrix entries, every internal node the sum of its children.
Qts build_qts(const OccupancyMatrix& m);

/// A B-labeled path from `origin`, materialized up to a fixed index. Indexing
/// past the stored prefix repeats the final node, which is then a leaf.
struct LabeledPath {
  NodeId origin = 0;
  std::vector<NodeId> steps;
  LabelSet labels;

  NodeId at(std::size_t i) const { return i < steps.size() ? steps[i] : steps.back(); }
};

/// Visits every distinct B-labeled path prefix (pi_0 .. pi_kappa) from v.
/// Paths are produced lazily; count grows as |B|^min(kappa, depth below v).
void for_each_labeled_path(const QtsShape& shape, NodeId v, LabelSet labels, int kappa,
                           const std::function<void(std::span<const NodeId>)>& visit);

std::vector<LabeledPath> labeled_paths(const QtsShape& shape, NodeId v, LabelSet labels,
                                       int kappa);

}  // namespace spatel
