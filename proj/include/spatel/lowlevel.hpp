#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "spatel/encoder.hpp"
#include "spatel/grid.hpp"
#include "spatel/planner.hpp"

namespace spatel {

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct SwarmState {
  double time = 0;
  std::vector<Point> positions;
};

/// Constant velocity of one robot over [t0, t1).
struct ControlSegment {
  int robot = 0;
  int step = 0;
  double t0 = 0;
  double t1 = 0;
  Point velocity;
};

/// Cell containing a point; points on a shared edge go to the south/east cell.
/// Throws std::out_of_range outside the workspace.
Cell cell_of(const GridConfig& cfg, Point p);
OccupancyMatrix occupancy_of(const GridConfig& cfg, const std::vector<Point>& positions);

/// Velocity that carries a robot from `from` to the neighbor `to` in one step.
Point move_velocity(const GridConfig& cfg, Cell from, Cell to);

/// Robots per direction (N, W, E, S) leaving `cell`. `demand` is indexed by
/// Direction. Greedy: the robot nearest to any edge that still has demand goes
/// through that edge; ties by distance, robot index, then direction order.
using Assignment = std::array<std::vector<int>, 4>;
Assignment assign(const GridConfig& cfg, Cell cell, const std::vector<int>& robots,
                  const std::vector<Point>& positions, const std::array<std::int64_t, 4>& demand);

struct Trajectory {
  double step = 1;
  /// Positions at t = k * step, k = 0..K.
  std::vector<SwarmState> boundaries;
  std::vector<ControlSegment> segments;

  int steps() const { return static_cast<int>(boundaries.size()) - 1; }
  double duration() const { return step * steps(); }
  /// Positions at time t, integrating the piecewise constant velocities.
  SwarmState at(double t) const;
};

/// Executes a plan. Throws std::invalid_argument when the initial positions do
/// not match the plan's first frame or the step violates the speed bound.
Trajectory simulate(const FlowPlan& plan, const std::vector<Point>& initial, const GridConfig& cfg);

/// Deterministic placement inside each cell, away from the cell edges.
std::vector<Point> place_in_cells(const GridConfig& cfg, const OccupancyMatrix& counts, std::uint64_t seed);

/// `t,robot,x,y` rows sampled every `dt` seconds (and at the final time).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double dt);

/// Highlighted cells drawn under the robots.
struct Region {
  std::string name;
  std::vector<Cell> cells;
  std::string color = "#f4d35e";
};

struct SvgOptions {
  int pixels = 480;
  std::string title;
};

void render_svg(std::ostream& out, const GridConfig& cfg, const std::vector<Point>& positions,
                const std::vector<Region>& regions, const SvgOptions& options = {});

}  // namespace spatel
