#include "spatel/grid.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace spatel {

double GridConfig::min_step() const {
  return side_length / (static_cast<double>(1 << (depth - 1)) * max_speed);
}

void GridConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("grid depth must be >= 1");
  if (depth > max_depth)
    throw std::invalid_argument("grid depth " + std::to_string(depth) + " exceeds guard " +
                                std::to_string(max_depth));
  if (!(side_length > 0) || !std::isfinite(side_length))
    throw std::invalid_argument("side_length must be positive");
  if (robot_count < 1) throw std::invalid_argument("robot_count must be >= 1");
  if (!(max_speed > 0) || !std::isfinite(max_speed))
    throw std::invalid_argument("max_speed must be positive");
  if (!(step > 0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
  // Relative slack so that exactly-on-the-bound configurations pass.
  if (step < min_step() * (1.0 - 1e-12))
    throw std::invalid_argument("step " + std::to_string(step) + " violates sampling bound " +
                                std::to_string(min_step()));
}

Rect cell_bounds(const GridConfig& cfg, Cell cell) {
  const int n = cfg.side();
  if (cell.row < 0 || cell.row >= n || cell.col < 0 || cell.col >= n)
    throw std::out_of_range("cell (" + std::to_string(cell.row) + "," + std::to_string(cell.col) +
                            ") outside " + std::to_string(n) + "x" + std::to_string(n) + " grid");
  const double w = cfg.cell_width();
  const double half = cfg.side_length / 2.0;
  Rect r;
  r.x_min = -half + cell.col * w;
  r.x_max = -half + (cell.col + 1) * w;
  r.y_max = half - cell.row * w;
  r.y_min = half - (cell.row + 1) * w;
  return r;
}

OccupancyMatrix::OccupancyMatrix(int depth) : depth_(depth) {
  if (depth < 0 || depth > 15) throw std::invalid_argument("occupancy depth out of range");
  counts_.assign(static_cast<std::size_t>(side()) * side(), 0);
}

OccupancyMatrix::OccupancyMatrix(int depth, std::vector<std::int64_t> counts)
    : depth_(depth), counts_(std::move(counts)) {
  if (depth < 0 || depth > 15) throw std::invalid_argument("occupancy depth out of range");
  if (counts_.size() != static_cast<std::size_t>(side()) * side())
    throw std::invalid_argument("occupancy size does not match depth");
  for (auto c : counts_)
    if (c < 0) throw std::invalid_argument("occupancy counts must be non-negative");
}

OccupancyMatrix OccupancyMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  const auto n = rows.size();
  int depth = 0;
  while ((std::size_t{1} << depth) < n) ++depth;
  if ((std::size_t{1} << depth) != n || n == 0)
    throw std::invalid_argument("occupancy side must be a power of two");
  std::vector<std::int64_t> flat;
  flat.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw std::invalid_argument("occupancy matrix must be square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return OccupancyMatrix(depth, std::move(flat));
}

std::int64_t OccupancyMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

OccupancyMatrix OccupancyMatrix::rotated_180() const {
  OccupancyMatrix out(depth_);
  const int n = side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(n - 1 - i, n - 1 - j) = (*this)(i, j);
  return out;
}

std::size_t OccupancyMatrix::index(int row, int col) const {
  const int n = side();
  if (row < 0 || row >= n || col < 0 || col >= n) throw std::out_of_range("occupancy index");
  return static_cast<std::size_t>(row) * n + col;
}

void write_csv(std::ostream& out, const OccupancyMatrix& m) {
  for (int i = 0; i < m.side(); ++i) {
    for (int j = 0; j < m.side(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

void write_frames_csv(std::ostream& out, const std::vector<OccupancyMatrix>& frames) {
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (k) out << '\n';
    write_csv(out, frames[k]);
  }
}

std::vector<OccupancyMatrix> read_frames_csv(std::istream& in) {
  std::vector<OccupancyMatrix> frames;
  std::vector<std::vector<std::int64_t>> rows;
  std::string line;
  int line_no = 0;
  auto flush = [&] {
    if (rows.empty()) return;
    try {
      frames.push_back(OccupancyMatrix::from_rows(rows));
    } catch (const std::exception& e) {
      throw std::runtime_error("frame ending at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (frames.size() > 1 && frames.back().depth() != frames.front().depth())
      throw std::runtime_error("frame ending at line " + std::to_string(line_no) +
                               " has a different size");
    rows.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    std::vector<std::int64_t> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad integer '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  flush();
  return frames;
}

}  // namespace spatel
