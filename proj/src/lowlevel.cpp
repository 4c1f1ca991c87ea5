#include "spatel/lowlevel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace spatel {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.000000") s.erase(0, 1);
  return s;
}

std::string xml_escape(const std::string& in) {
  std::string t;
  for (char ch : in) {
    if (ch == '<') t += "&lt;";
    else if (ch == '>') t += "&gt;";
    else if (ch == '&') t += "&amp;";
    else if (ch == '"') t += "&quot;";
    else t += ch;
  }
  return t;
}

int clamp_index(double q, int n, double slack) {
  if (q < -slack || q > n + slack) return -1;
  return std::clamp(static_cast<int>(std::floor(q)), 0, n - 1);
}

}  // namespace

Cell cell_of(const GridConfig& cfg, Point p) {
  const double w = cfg.cell_width();
  const double half = cfg.side_length / 2;
  const int n = cfg.side();
  const int col = clamp_index((p.x + half) / w, n, 1e-9);
  const int row = clamp_index((half - p.y) / w, n, 1e-9);
  if (col < 0 || row < 0)
    throw std::out_of_range("point (" + format_number(p.x) + ", " + format_number(p.y) + ") outside the workspace");
  return Cell{row, col};
}

OccupancyMatrix occupancy_of(const GridConfig& cfg, const std::vector<Point>& positions) {
  OccupancyMatrix m(cfg.depth);
  for (const Point& p : positions) {
    const Cell c = cell_of(cfg, p);
    ++m(c.row, c.col);
  }
  return m;
}

Point move_velocity(const GridConfig& cfg, Cell from, Cell to) {
  const int di = from.row - to.row;
  const int dj = to.col - from.col;
  if (std::abs(di) + std::abs(dj) != 1) throw std::invalid_argument("move_velocity: cells are not 4-neighbors");
  const double v = cfg.cell_width() / cfg.step;
  return Point{v * dj, v * di};
}

Assignment assign(const GridConfig& cfg, Cell cell, const std::vector<int>& robots,
                  const std::vector<Point>& positions, const std::array<std::int64_t, 4>& demand) {
  std::int64_t total = 0;
  for (auto d : demand) {
    if (d < 0) throw std::invalid_argument("assign: negative demand");
    total += d;
  }
  if (total > static_cast<std::int64_t>(robots.size()))
    throw std::invalid_argument("assign: cell (" + std::to_string(cell.row) + "," + std::to_string(cell.col) +
                                ") must send " + std::to_string(total) + " robots but holds " +
                                std::to_string(robots.size()));
  const Rect r = cell_bounds(cfg, cell);
  auto left = demand;
  std::vector<char> taken(robots.size(), 0);
  Assignment out;
  while (total > 0) {
    double best_d = std::numeric_limits<double>::infinity();
    int best_robot = -1;
    std::size_t best_slot = 0;
    int best_dir = 0;
    for (std::size_t i = 0; i < robots.size(); ++i) {
      if (taken[i]) continue;
      const Point p = positions.at(static_cast<std::size_t>(robots[i]));
      const double dist[4] = {r.y_max - p.y, p.x - r.x_min, r.x_max - p.x, p.y - r.y_min};  // N, W, E, S
      for (int d = 0; d < 4; ++d) {
        if (left[d] == 0) continue;
        const bool better = dist[d] < best_d ||
                            (dist[d] == best_d && (robots[i] < best_robot || (robots[i] == best_robot && d < best_dir)));
        if (better) {
          best_d = dist[d];
          best_robot = robots[i];
          best_slot = i;
          best_dir = d;
        }
      }
    }
    taken[best_slot] = 1;
    out[best_dir].push_back(best_robot);
    --left[best_dir];
    --total;
  }
  return out;
}

SwarmState Trajectory::at(double t) const {
  if (boundaries.empty()) throw std::logic_error("empty trajectory");
  if (t <= 0) return SwarmState{t, boundaries.front().positions};
  const int k = static_cast<int>(std::floor(t / step));
  if (k >= steps()) return SwarmState{t, boundaries.back().positions};
  SwarmState s{t, boundaries[k].positions};
  const double dt = t - k * step;
  for (const auto& seg : segments) {
    if (seg.step != k) continue;
    s.positions[seg.robot].x += seg.velocity.x * dt;
    s.positions[seg.robot].y += seg.velocity.y * dt;
  }
  return s;
}

Trajectory simulate(const FlowPlan& plan, const std::vector<Point>& initial, const GridConfig& cfg) {
  cfg.validate();
  if (plan.depth != cfg.depth) throw std::invalid_argument("simulate: plan depth does not match the grid");
  if (std::abs(plan.step - cfg.step) > 1e-12 * cfg.step) throw std::invalid_argument("simulate: plan step does not match the grid");
  const double speed = cfg.cell_width() / cfg.step;
  if (speed > cfg.max_speed * (1 + 1e-12))
    throw std::invalid_argument("simulate: a one-cell move needs speed " + format_number(speed) + " > max_speed " +
                                format_number(cfg.max_speed));
  if (plan.occupancies.empty()) throw std::invalid_argument("simulate: plan has no frames");
  if (occupancy_of(cfg, initial) != plan.occupancies.front())
    throw std::invalid_argument("simulate: initial positions do not match the plan's first frame");

  const int side = cfg.side();
  Trajectory traj;
  traj.step = cfg.step;
  traj.boundaries.push_back({0.0, initial});
  std::vector<Cell> where;
  for (const Point& p : initial) where.push_back(cell_of(cfg, p));
  const double w = cfg.cell_width();

  std::size_t next_flow = 0;
  for (int k = 0; k < plan.steps(); ++k) {
    // demand[cell][direction]
    std::vector<std::array<std::int64_t, 4>> demand(static_cast<std::size_t>(side) * side);
    for (auto& d : demand) d.fill(0);
    for (; next_flow < plan.flows.size() && plan.flows[next_flow].step == k; ++next_flow) {
      const auto& f = plan.flows[next_flow];
      const int di = f.to.row - f.from.row, dj = f.to.col - f.from.col;
      const Direction dir = di < 0 ? Direction::N : dj < 0 ? Direction::W : dj > 0 ? Direction::E : Direction::S;
      if (std::abs(di) + std::abs(dj) != 1) throw std::invalid_argument("simulate: flow between non-adjacent cells");
      demand[f.from.row * side + f.from.col][static_cast<int>(dir)] += f.count;
    }
    if (next_flow < plan.flows.size() && plan.flows[next_flow].step < k)
      throw std::invalid_argument("simulate: plan flows are not ordered by step");

    std::vector<std::vector<int>> members(demand.size());
    for (int r = 0; r < static_cast<int>(where.size()); ++r) members[where[r].row * side + where[r].col].push_back(r);
    const auto& from = traj.boundaries.back().positions;
    std::vector<Point> next = from;
    std::vector<ControlSegment> segs;
    for (std::size_t c = 0; c < demand.size(); ++c) {
      const Cell cell{static_cast<int>(c) / side, static_cast<int>(c) % side};
      const auto a = assign(cfg, cell, members[c], from, demand[c]);
      for (int d = 0; d < 4; ++d) {
        static constexpr int kDr[4] = {-1, 0, 0, 1};
        static constexpr int kDc[4] = {0, -1, 1, 0};
        const Cell to{cell.row + kDr[d], cell.col + kDc[d]};
        for (int robot : a[d]) {
          const Point v = move_velocity(cfg, cell, to);
          if (std::hypot(v.x, v.y) > cfg.max_speed * (1 + 1e-12)) throw std::logic_error("simulate: speed bound exceeded");
          segs.push_back({robot, k, k * cfg.step, (k + 1) * cfg.step, v});
          next[robot].x = from[robot].x + kDc[d] * w;
          next[robot].y = from[robot].y - kDr[d] * w;
          where[robot] = to;
        }
      }
    }
    std::sort(segs.begin(), segs.end(), [](const ControlSegment& a, const ControlSegment& b) { return a.robot < b.robot; });
    traj.segments.insert(traj.segments.end(), segs.begin(), segs.end());
    traj.boundaries.push_back({(k + 1) * cfg.step, std::move(next)});
    if (occupancy_of(cfg, traj.boundaries.back().positions) != plan.occupancies[k + 1])
      throw std::logic_error("simulate: occupancy after step " + std::to_string(k) + " differs from the plan");
  }
  return traj;
}

std::vector<Point> place_in_cells(const GridConfig& cfg, const OccupancyMatrix& counts, std::uint64_t seed) {
  if (counts.depth() != cfg.depth) throw std::invalid_argument("place_in_cells: depth mismatch");
  std::mt19937_64 rng(seed);
  // 53-bit fractions straight from the engine; the distribution classes are
  // not specified bit for bit across standard libraries.
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point> out;
  for (int r = 0; r < counts.side(); ++r)
    for (int c = 0; c < counts.side(); ++c) {
      const Rect b = cell_bounds(cfg, {r, c});
      const double w = b.x_max - b.x_min;
      for (std::int64_t i = 0; i < counts(r, c); ++i)
        out.push_back({b.x_min + w * (0.1 + 0.8 * unit()), b.y_min + w * (0.1 + 0.8 * unit())});
    }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("sampling interval must be positive");
  out << "t,robot,x,y\n";
  const double end = traj.duration();
  const long samples = static_cast<long>(std::floor(end / dt + 1e-9));
  auto emit = [&](double t) {
    const auto s = traj.at(t);
    for (std::size_t r = 0; r < s.positions.size(); ++r)
      out << fixed(t, 6) << ',' << r << ',' << fixed(s.positions[r].x, 6) << ',' << fixed(s.positions[r].y, 6) << '\n';
  };
  for (long i = 0; i <= samples; ++i) emit(i * dt);
  if (std::abs(samples * dt - end) > 1e-9) emit(end);
}

void render_svg(std::ostream& out, const GridConfig& cfg, const std::vector<Point>& positions,
                const std::vector<Region>& regions, const SvgOptions& options) {
  const double px = options.pixels;
  const double s = px / cfg.side_length;
  const double half = cfg.side_length / 2;
  const double cell = cfg.cell_width() * s;
  const int header = options.title.empty() ? 0 : 24;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.pixels << "\" height=\""
      << options.pixels + header << "\" viewBox=\"0 " << -header << ' ' << options.pixels << ' '
      << options.pixels + header << "\">\n";
  if (!options.title.empty())
    out << "<text x=\"4\" y=\"-7\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(options.title)
        << "</text>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << fixed(px) << "\" height=\"" << fixed(px) << "\" fill=\"#ffffff\"/>\n";
  for (const auto& reg : regions)
    for (const Cell& c : reg.cells) {
      const Rect b = cell_bounds(cfg, c);
      out << "<rect x=\"" << fixed((b.x_min + half) * s) << "\" y=\"" << fixed((half - b.y_max) * s)
          << "\" width=\"" << fixed(cell) << "\" height=\"" << fixed(cell) << "\" fill=\"" << xml_escape(reg.color)
          << "\" fill-opacity=\"0.6\"><title>" << xml_escape(reg.name) << "</title></rect>\n";
    }
  for (int i = 0; i <= cfg.side(); ++i) {
    const double v = i * cell;
    out << "<line x1=\"" << fixed(v) << "\" y1=\"0\" x2=\"" << fixed(v) << "\" y2=\"" << fixed(px)
        << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"0\" y1=\"" << fixed(v) << "\" x2=\"" << fixed(px) << "\" y2=\"" << fixed(v)
        << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  }
  const double radius = std::max(2.0, cell * 0.06);
  for (const Point& p : positions)
    out << "<circle cx=\"" << fixed((p.x + half) * s) << "\" cy=\"" << fixed((half - p.y) * s) << "\" r=\""
        << fixed(radius) << "\" fill=\"#1d3557\"/>\n";
  out << "</svg>\n";
}

}  // namespace spatel
