#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace spatel {

/// Workspace and discretization parameters. The workspace is the square
/// [-a/2, a/2]^2 cut into 2^D x 2^D equal cells.
struct GridConfig {
  int depth = 1;
  double side_length = 1.0;
  int robot_count = 1;
  double max_speed = 1.0;
  double step = 1.0;
  // Tree size grows as 4^D; raise deliberately for large grids.
  int max_depth = 6;

  int side() const { return 1 << depth; }
  int cell_count() const { return side() * side(); }
  double cell_width() const { return side_length / side(); }

  /// Smallest step allowed by the sampling bound a / (2^(D-1) u_m).
  double min_step() const;

  /// Throws std::invalid_argument naming the first violated field.
  void validate() const;
};

/// Zero-based cell address. Row 0 is the north edge, column 0 the west edge.
struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Rect {
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
};

/// Workspace rectangle covered by a cell.
Rect cell_bounds(const GridConfig& cfg, Cell cell);

/// Robots per cell at one time step, stored row-major with the north row first.
class OccupancyMatrix {
 public:
  OccupancyMatrix() = default;
  explicit OccupancyMatrix(int depth);
  OccupancyMatrix(int depth, std::vector<std::int64_t> counts);

  /// Builds from nested rows; all rows must have 2^D entries.
  static OccupancyMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  int depth() const { return depth_; }
  int side() const { return 1 << depth_; }

  std::int64_t operator()(int row, int col) const { return counts_[index(row, col)]; }
  std::int64_t& operator()(int row, int col) { return counts_[index(row, col)]; }
  std::int64_t at(Cell c) const { return (*this)(c.row, c.col); }

  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const;

  /// The same matrix turned by 180 degrees.
  OccupancyMatrix rotated_180() const;

  friend bool operator==(const OccupancyMatrix&, const OccupancyMatrix&) = default;

 private:
  std::size_t index(int row, int col) const;

  int depth_ = 0;
  std::vector<std::int64_t> counts_;
};

/// Dense CSV, one matrix row per line, north row first.
void write_csv(std::ostream& out, const OccupancyMatrix& m);

/// Writes frames separated by a blank line.
void write_frames_csv(std::ostream& out, const std::vector<OccupancyMatrix>& frames);

/// Reads blank-line separated frames; every frame must be square with a
/// power-of-two side. Throws std::runtime_error with the offending line.
std::vector<OccupancyMatrix> read_frames_csv(std::istream& in);

}  // namespace spatel
