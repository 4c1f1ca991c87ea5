#include "spatel/qts.hpp"

#include <bit>
#include <stdexcept>

namespace spatel {

const char* to_string(Label l) {
  switch (l) {
    case Label::NW: return "NW";
    case Label::NE: return "NE";
    case Label::SW: return "SW";
    case Label::SE: return "SE";
  }
  return "?";
}

int LabelSet::size() const { return std::popcount(static_cast<unsigned>(bits_)); }

std::vector<Label> LabelSet::labels() const {
  std::vector<Label> out;
  for (Label l : kAllLabels)
    if (contains(l)) out.push_back(l);
  return out;
}

std::string LabelSet::to_string() const {
  if (is_all()) return "L";
  std::string s;
  for (Label l : labels()) {
    if (!s.empty()) s += ',';
    s += spatel::to_string(l);
  }
  return s;
}

QtsShape::QtsShape(int depth) : depth_(depth) {
  if (depth < 0 || depth > 10) throw std::invalid_argument("quad tree depth out of range");
  int count = 0;
  for (int l = 0; l <= depth; ++l) count += 1 << (2 * l);
  level_.resize(count);
  corner_.resize(count);
  level_[0] = 0;
  corner_[0] = Cell{0, 0};
  for (NodeId v = 0; v < count; ++v) {
    if (level_[v] == depth) continue;
    const int half = 1 << (depth - level_[v] - 1);
    for (Label l : kAllLabels) {
      const NodeId c = child(v, l);
      level_[c] = level_[v] + 1;
      const int dr = (l == Label::SW || l == Label::SE) ? half : 0;
      const int dc = (l == Label::NE || l == Label::SE) ? half : 0;
      corner_[c] = Cell{corner_[v].row + dr, corner_[v].col + dc};
    }
  }
  const int n = 1 << depth;
  leaf_by_cell_.assign(static_cast<std::size_t>(n) * n, -1);
  for (NodeId v = 0; v < count; ++v)
    if (level_[v] == depth) leaf_by_cell_[corner_[v].row * n + corner_[v].col] = v;
}

std::vector<NodeId> QtsShape::successors(NodeId v, LabelSet labels) const {
  if (is_leaf(v)) return {v};
  std::vector<NodeId> out;
  for (Label l : kAllLabels)
    if (labels.contains(l)) out.push_back(child(v, l));
  return out;
}

NodeId QtsShape::leaf_of(Cell c) const {
  const int n = 1 << depth_;
  if (c.row < 0 || c.row >= n || c.col < 0 || c.col >= n) throw std::out_of_range("leaf_of");
  return leaf_by_cell_[c.row * n + c.col];
}

std::vector<Cell> QtsShape::cells_under(NodeId v) const {
  std::vector<Cell> out;
  const int e = extent(v);
  out.reserve(static_cast<std::size_t>(e) * e);
  for (int i = 0; i < e; ++i)
    for (int j = 0; j < e; ++j) out.push_back(Cell{corner_[v].row + i, corner_[v].col + j});
  return out;
}

Qts::Qts(QtsShape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != shape_.node_count())
    throw std::invalid_argument("valuation size does not match tree");
}

Qts build_qts(const OccupancyMatrix& m) {
  QtsShape shape(m.depth());
  std::vector<double> values(shape.node_count(), 0.0);
  // Children always have larger ids than their parent, so a reverse sweep
  // sees every child before its parent.
  for (NodeId v = shape.node_count() - 1; v >= 0; --v) {
    if (shape.is_leaf(v)) {
      values[v] = static_cast<double>(m.at(shape.corner(v)));
    } else {
      double sum = 0;
      for (Label l : kAllLabels) sum += values[shape.child(v, l)];
      values[v] = sum;
    }
  }
  return Qts(std::move(shape), std::move(values));
}

namespace {

void walk(const QtsShape& shape, LabelSet labels, int kappa, std::vector<NodeId>& prefix,
          const std::function<void(std::span<const NodeId>)>& visit) {
  if (static_cast<int>(prefix.size()) == kappa + 1) {
    visit(prefix);
    return;
  }
  const NodeId last = prefix.back();
  if (shape.is_leaf(last)) {
    // Remaining indices repeat the leaf.
    const auto mark = prefix.size();
    prefix.resize(kappa + 1, last);
    visit(prefix);
    prefix.resize(mark);
    return;
  }
  for (NodeId next : shape.successors(last, labels)) {
    prefix.push_back(next);
    walk(shape, labels, kappa, prefix, visit);
    prefix.pop_back();
  }
}

}  // namespace

void for_each_labeled_path(const QtsShape& shape, NodeId v, LabelSet labels, int kappa,
                           const std::function<void(std::span<const NodeId>)>& visit) {
  if (labels.empty()) throw std::invalid_argument("labeled path needs a non-empty label set");
  if (kappa < 0) throw std::invalid_argument("labeled path index must be >= 0");
  if (v < 0 || v >= shape.node_count()) throw std::out_of_range("labeled path origin");
  std::vector<NodeId> prefix{v};
  prefix.reserve(kappa + 1);
  walk(shape, labels, kappa, prefix, visit);
}

std::vector<LabeledPath> labeled_paths(const QtsShape& shape, NodeId v, LabelSet labels,
                                       int kappa) {
  std::vector<LabeledPath> out;
  for_each_labeled_path(shape, v, labels, kappa, [&](std::span<const NodeId> steps) {
    out.push_back(LabeledPath{v, std::vector<NodeId>(steps.begin(), steps.end()), labels});
  });
  return out;
}

}  // namespace spatel
