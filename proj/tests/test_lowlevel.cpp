#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spatel/lowlevel.hpp"
#include "spatel/monitor.hpp"
#include "spatel/parser.hpp"
#include "support/random_formula.hpp"

using namespace spatel;

namespace {

GridConfig grid(int depth, double side, int robots, double speed = 4, double step = 1) {
  GridConfig g;
  g.depth = depth;
  g.side_length = side;
  g.robot_count = robots;
  g.max_speed = speed;
  g.step = step;
  return g;
}

std::array<std::int64_t, 4> demand(std::int64_t n, std::int64_t w, std::int64_t e, std::int64_t s) {
  return {n, w, e, s};
}

}  // namespace

TEST_CASE("cell lookup and move velocity") {
  const auto g = grid(2, 4, 1);
  CHECK(cell_of(g, {-1.5, 1.5}) == Cell{0, 0});
  CHECK(cell_of(g, {1.5, -1.5}) == Cell{3, 3});
  CHECK(cell_of(g, {0, 0}) == Cell{2, 2});  // shared corner goes south-east
  CHECK(cell_of(g, {2, -2}) == Cell{3, 3});
  CHECK_THROWS_AS(cell_of(g, {2.5, 0}), std::out_of_range);

  // a = 4, D = 2, dt = 1: one cell per second
  const Point east = move_velocity(g, {1, 1}, {1, 2});
  CHECK(east.x == 1);
  CHECK(east.y == 0);
  const Point north = move_velocity(g, {1, 1}, {0, 1});
  CHECK(north.x == 0);
  CHECK(north.y == 1);
  const Point west = move_velocity(grid(2, 4, 1, 4, 0.5), {1, 1}, {1, 0});
  CHECK(west.x == -2);
  CHECK_THROWS_AS(move_velocity(g, {1, 1}, {2, 2}), std::invalid_argument);
}

TEST_CASE("assignment examples") {
  const auto g = grid(1, 2, 2);
  // cell (0,0) spans x in [-1,0], y in [0,1]
  SUBCASE("single robot, single demand") {
    const std::vector<Point> pos{{-0.5, 0.5}};
    const auto a = assign(g, {0, 0}, {0}, pos, demand(0, 0, 1, 0));
    CHECK(a[2] == std::vector<int>{0});
  }
  SUBCASE("each robot takes its nearest demanded edge") {
    const std::vector<Point> pos{{-0.5, 0.95}, {-0.05, 0.5}};  // near north, near east
    const auto a = assign(g, {0, 0}, {0, 1}, pos, demand(1, 0, 1, 0));
    CHECK(a[0] == std::vector<int>{0});
    CHECK(a[2] == std::vector<int>{1});
  }
  SUBCASE("no demand") {
    const std::vector<Point> pos{{-0.5, 0.5}};
    const auto a = assign(g, {0, 0}, {0}, pos, demand(0, 0, 0, 0));
    for (const auto& v : a) CHECK(v.empty());
  }
  SUBCASE("demand above supply") {
    const std::vector<Point> pos{{-0.5, 0.5}};
    CHECK_THROWS_AS(assign(g, {0, 0}, {0}, pos, demand(1, 0, 1, 0)), std::invalid_argument);
  }
  SUBCASE("ties go to the lower robot index, then direction order") {
    const std::vector<Point> pos{{-0.5, 0.5}, {-0.5, 0.5}};
    const auto a = assign(g, {0, 0}, {0, 1}, pos, demand(1, 0, 1, 0));
    CHECK(a[0] == std::vector<int>{0});
    CHECK(a[2] == std::vector<int>{1});
  }
}

TEST_CASE("greedy assignment on two robots is the min-distance matching") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const auto g = grid(1, 2, 2);
  const Rect r = cell_bounds(g, {0, 0});
  auto dist = [&](Point p, int d) {
    const double ds[4] = {r.y_max - p.y, p.x - r.x_min, r.x_max - p.x, p.y - r.y_min};
    return ds[d];
  };
  for (int trial = 0; trial < 300; ++trial) {
    // the two robots sit near different edges, so the greedy pick is forced
    const int d0 = trial % 4;
    const int d1 = (d0 + 1 + trial % 3) % 4;
    // the free coordinate stays in the middle band, away from other edges
    auto near = [&](int d) {
      Point p{-0.7 + 0.4 * u(rng), 0.3 + 0.4 * u(rng)};
      const double eps = 0.01 + 0.05 * u(rng);
      if (d == 0) p.y = 1 - eps;
      if (d == 1) p.x = -1 + eps;
      if (d == 2) p.x = -eps;
      if (d == 3) p.y = eps;
      return p;
    };
    const std::vector<Point> pos{near(d0), near(d1)};
    std::array<std::int64_t, 4> dem{};
    dem[d0] = 1;
    dem[d1] = 1;
    const auto a = assign(g, {0, 0}, {0, 1}, pos, dem);
    const double greedy = dist(pos[a[d0][0]], d0) + dist(pos[a[d1][0]], d1);
    const double best = std::min(dist(pos[0], d0) + dist(pos[1], d1), dist(pos[1], d0) + dist(pos[0], d1));
    CHECK(greedy == doctest::Approx(best));
  }
}

TEST_CASE("simulate a single eastward move") {
  const auto g = grid(2, 4, 1, 2, 1);
  const std::vector<Point> start{{-1.5, 0.5}};  // cell (1,0)
  const auto n0 = occupancy_of(g, start);
  std::vector<std::vector<std::int64_t>> flows(1, std::vector<std::int64_t>(grid_edges(2).size(), 0));
  const auto edges = grid_edges(2);
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edges[e].from == Cell{1, 0} && edges[e].dir == Direction::E) flows[0][e] = 1;
  const auto p = make_plan(2, 1, flows, n0);
  const auto t = simulate(p, start, g);
  REQUIRE(t.segments.size() == 1);
  CHECK(t.segments[0].velocity == Point{1, 0});
  CHECK(t.segments[0].t0 == 0);
  CHECK(t.segments[0].t1 == 1);
  CHECK(t.at(0.5).positions[0] == Point{-1, 0.5});
  CHECK(t.boundaries[1].positions[0] == Point{-0.5, 0.5});
}

TEST_CASE("empty plan leaves the swarm in place") {
  const auto g = grid(1, 2, 3);
  const auto n0 = OccupancyMatrix::from_rows({{2, 0}, {0, 1}});
  const auto start = place_in_cells(g, n0, 9);
  const auto p = make_plan(1, 1, {std::vector<std::int64_t>(8, 0), std::vector<std::int64_t>(8, 0)}, n0);
  const auto t = simulate(p, start, g);
  CHECK(t.segments.empty());
  for (double x : {0.0, 0.3, 1.0, 1.7, 2.0}) CHECK(t.at(x).positions == start);
}

TEST_CASE("simulate rejects mismatched inputs") {
  const auto g = grid(1, 2, 1);
  const auto n0 = OccupancyMatrix::from_rows({{1, 0}, {0, 0}});
  const auto p = make_plan(1, 1, {std::vector<std::int64_t>(8, 0)}, n0);
  CHECK_THROWS_AS(simulate(p, {{0.5, -0.5}}, g), std::invalid_argument);
  auto slow = g;
  slow.max_speed = 0.5;  // one cell per second needs speed 1
  slow.step = 4;         // passes the sampling bound, yet the plan's step is 1
  CHECK_THROWS_AS(simulate(p, {{-0.5, 0.5}}, slow), std::invalid_argument);
}

TEST_CASE("simulated frames reproduce planned frames") {
  testing::FormulaGen gen(55);
  for (int trial = 0; trial < 12; ++trial) {
    const int robots = 2 + trial % 5;
    auto g = grid(2, 8, robots, 4, 1);
    const auto f = gen.spatel(2, 3);
    const auto n0 = gen.occupancy(2, robots);
    PlannerConfig pc;
    pc.mode = trial % 3 == 2 ? PlanMode::RelaxedRound : PlanMode::Exact;
    const auto p = plan(g, pc, n0, f);
    const auto start = place_in_cells(g, n0, trial);
    const auto t = simulate(p, start, g);
    REQUIRE(t.steps() == p.steps());
    std::vector<OccupancyMatrix> frames;
    for (int k = 0; k <= t.steps(); ++k) {
      frames.push_back(occupancy_of(g, t.boundaries[k].positions));
      CHECK(frames.back() == p.occupancies[k]);
    }
    for (const auto& s : t.segments) CHECK(std::hypot(s.velocity.x, s.velocity.y) <= g.max_speed);
    CHECK(spatel_robustness(f, QtsSignal::from_occupancy(frames, 1.0)) == p.monitored_robustness);
    // same inputs, same trajectory
    const auto again = simulate(p, start, g);
    std::ostringstream a, b;
    write_trajectory_csv(a, t, 0.25);
    write_trajectory_csv(b, again, 0.25);
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("placement stays inside cells and is seeded") {
  const auto g = grid(2, 4, 10);
  const auto n0 = OccupancyMatrix::from_rows({{3, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 0, 4}, {1, 0, 0, 0}});
  const auto a = place_in_cells(g, n0, 1);
  CHECK(occupancy_of(g, a) == n0);
  CHECK(place_in_cells(g, n0, 1) == a);
  CHECK(place_in_cells(g, n0, 2) != a);
}

TEST_CASE("trajectory csv and svg output") {
  const auto g = grid(1, 2, 1);
  const auto n0 = OccupancyMatrix::from_rows({{1, 0}, {0, 0}});
  std::vector<std::int64_t> step(8, 0);
  step[0] = 1;  // (0,0) east
  const auto p = make_plan(1, 1, {step}, n0);
  const auto t = simulate(p, {{-0.5, 0.5}}, g);
  std::ostringstream csv;
  write_trajectory_csv(csv, t, 0.5);
  CHECK(csv.str() ==
        "t,robot,x,y\n"
        "0.000000,0,-0.500000,0.500000\n"
        "0.500000,0,0.000000,0.500000\n"
        "1.000000,0,0.500000,0.500000\n");

  std::ostringstream svg;
  render_svg(svg, g, t.boundaries[1].positions, {Region{"goal <1>", {{0, 1}}, "#ff0000"}}, {100, "k = 1"});
  const std::string s = svg.str();
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("k = 1") != std::string::npos);
  CHECK(s.find("goal &lt;1&gt;") != std::string::npos);
  CHECK(s.find("<rect x=\"50.00\" y=\"0.00\" width=\"50.00\" height=\"50.00\" fill=\"#ff0000\"") != std::string::npos);
  CHECK(s.find("<circle cx=\"75.00\" cy=\"25.00\"") != std::string::npos);
  std::ostringstream again;
  render_svg(again, g, t.boundaries[1].positions, {Region{"goal <1>", {{0, 1}}, "#ff0000"}}, {100, "k = 1"});
  CHECK(again.str() == s);
}
