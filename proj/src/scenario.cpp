#include "spatel/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace spatel {

using nlohmann::json;

ScenarioError::ScenarioError(std::string pointer, const std::string& message)
    : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + message), pointer_(std::move(pointer)) {}

namespace {

std::string child(const std::string& ptr, const std::string& key) {
  std::string esc;
  for (char c : key) {
    if (c == '~') esc += "~0";
    else if (c == '/') esc += "~1";
    else esc += c;
  }
  return ptr + "/" + esc;
}

std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& require(const json& j, const std::string& ptr, const char* key) {
  if (!j.is_object()) throw ScenarioError(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ScenarioError(child(ptr, key), "missing required field");
  return *it;
}

const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw ScenarioError(ptr, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ScenarioError(ptr, "expected a finite number");
  return x;
}

std::int64_t integer(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) throw ScenarioError(ptr, "expected an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& v, const std::string& ptr) {
  if (!v.is_string()) throw ScenarioError(ptr, "expected a string");
  return v.get<std::string>();
}

void check_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ScenarioError(ptr, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ScenarioError(child(ptr, it.key()), "unknown field");
}

Cell cell_at(const json& v, const std::string& ptr, int side) {
  if (!v.is_array() || v.size() != 2) throw ScenarioError(ptr, "expected [row, col]");
  const auto r = integer(v[0], child(ptr, 0));
  const auto c = integer(v[1], child(ptr, 1));
  if (r < 0 || r >= side) throw ScenarioError(child(ptr, 0), "row outside the grid");
  if (c < 0 || c >= side) throw ScenarioError(child(ptr, 1), "column outside the grid");
  return Cell{static_cast<int>(r), static_cast<int>(c)};
}

Spatel parse_at(const std::string& src, const Bindings& b, const std::string& ptr) {
  try {
    return parse(src, b);
  } catch (const ParseError& e) {
    throw ScenarioError(ptr, e.what());
  }
}

void read_grid(Scenario& s, const json& g) {
  const std::string p = "/grid";
  check_keys(g, p, {"depth", "side_length", "max_speed", "step", "robot_count", "max_depth"});
  s.grid.depth = static_cast<int>(integer(require(g, p, "depth"), p + "/depth"));
  s.grid.side_length = number(require(g, p, "side_length"), p + "/side_length");
  s.grid.max_speed = number(require(g, p, "max_speed"), p + "/max_speed");
  s.grid.step = number(require(g, p, "step"), p + "/step");
  if (auto* m = optional_field(g, "max_depth")) s.grid.max_depth = static_cast<int>(integer(*m, p + "/max_depth"));
  s.grid.robot_count = -1;
  if (auto* n = optional_field(g, "robot_count")) s.grid.robot_count = static_cast<int>(integer(*n, p + "/robot_count"));
  // Field-level checks first, so the pointer names the field.
  if (s.grid.depth < 1) throw ScenarioError(p + "/depth", "must be >= 1");
  if (s.grid.depth > s.grid.max_depth)
    throw ScenarioError(p + "/depth", "exceeds max_depth " + std::to_string(s.grid.max_depth));
  if (!(s.grid.side_length > 0)) throw ScenarioError(p + "/side_length", "must be positive");
  if (!(s.grid.max_speed > 0)) throw ScenarioError(p + "/max_speed", "must be positive");
  if (!(s.grid.step > 0)) throw ScenarioError(p + "/step", "must be positive");
  if (s.grid.step < s.grid.min_step() * (1 - 1e-12))
    throw ScenarioError(p + "/step", "below the sampling bound " + format_number(s.grid.min_step()));
}

void read_initial(Scenario& s, const json& init) {
  const std::string p = "/initial";
  check_keys(init, p, {"counts", "positions", "seed"});
  if (auto* seed = optional_field(init, "seed")) {
    if (!seed->is_number_unsigned()) throw ScenarioError(p + "/seed", "expected a non-negative integer");
    s.seed = seed->get<std::uint64_t>();
  }
  const json* counts = optional_field(init, "counts");
  const json* positions = optional_field(init, "positions");
  if ((counts == nullptr) == (positions == nullptr)) throw ScenarioError(p, "give exactly one of counts or positions");
  const int side = s.grid.side();
  if (counts) {
    const std::string cp = p + "/counts";
    if (!counts->is_array() || static_cast<int>(counts->size()) != side)
      throw ScenarioError(cp, "expected " + std::to_string(side) + " rows");
    std::vector<std::int64_t> flat;
    for (std::size_t r = 0; r < counts->size(); ++r) {
      const auto& row = (*counts)[r];
      if (!row.is_array() || static_cast<int>(row.size()) != side)
        throw ScenarioError(child(cp, r), "expected " + std::to_string(side) + " entries");
      for (std::size_t c = 0; c < row.size(); ++c) {
        const auto v = integer(row[c], child(child(cp, r), c));
        if (v < 0) throw ScenarioError(child(child(cp, r), c), "must be >= 0");
        flat.push_back(v);
      }
    }
    s.initial_counts = OccupancyMatrix(s.grid.depth, flat);
    if (s.grid.robot_count < 0) s.grid.robot_count = static_cast<int>(s.initial_counts.total());
    if (s.initial_counts.total() != s.grid.robot_count)
      throw ScenarioError(cp, "holds " + std::to_string(s.initial_counts.total()) + " robots but robot_count is " +
                                  std::to_string(s.grid.robot_count));
    s.initial_positions = place_in_cells(s.grid, s.initial_counts, s.seed);
  } else {
    const std::string pp = p + "/positions";
    if (!positions->is_array()) throw ScenarioError(pp, "expected an array of [x, y]");
    const double half = s.grid.side_length / 2;
    for (std::size_t i = 0; i < positions->size(); ++i) {
      const auto& v = (*positions)[i];
      const std::string ip = child(pp, i);
      if (!v.is_array() || v.size() != 2) throw ScenarioError(ip, "expected [x, y]");
      const Point pt{number(v[0], child(ip, 0)), number(v[1], child(ip, 1))};
      if (std::abs(pt.x) > half || std::abs(pt.y) > half) throw ScenarioError(ip, "outside the workspace");
      s.initial_positions.push_back(pt);
    }
    if (s.grid.robot_count < 0) s.grid.robot_count = static_cast<int>(s.initial_positions.size());
    if (static_cast<int>(s.initial_positions.size()) != s.grid.robot_count)
      throw ScenarioError(pp, "has " + std::to_string(s.initial_positions.size()) + " positions but robot_count is " +
                                  std::to_string(s.grid.robot_count));
    s.explicit_positions = true;
    s.initial_counts = occupancy_of(s.grid, s.initial_positions);
  }
  if (s.grid.robot_count < 1) throw ScenarioError("/grid/robot_count", "must be >= 1");
}

void read_planner(Scenario& s, const json& pl) {
  const std::string p = "/planner";
  check_keys(pl, p, {"alpha", "mode", "running_cost", "terminal_cost", "capacity", "epsilon", "time_limit", "big_m",
                     "aux_node_vars"});
  auto& c = s.planner;
  if (auto* v = optional_field(pl, "alpha")) {
    c.alpha = number(*v, p + "/alpha");
    if (c.alpha < 0) throw ScenarioError(p + "/alpha", "must be >= 0");
  }
  if (auto* v = optional_field(pl, "mode")) {
    try {
      c.mode = plan_mode_from_string(text(*v, p + "/mode"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(p + "/mode", e.what());
    }
  }
  if (auto* v = optional_field(pl, "running_cost")) {
    const auto t = text(*v, p + "/running_cost");
    if (t == "total_displacement") c.running_cost = RunningCost::TotalDisplacement;
    else if (t == "none") c.running_cost = RunningCost::None;
    else throw ScenarioError(p + "/running_cost", "expected total_displacement or none");
  }
  if (auto* v = optional_field(pl, "terminal_cost"))
    if (text(*v, p + "/terminal_cost") != "none") throw ScenarioError(p + "/terminal_cost", "only none is supported");
  if (auto* v = optional_field(pl, "capacity")) {
    c.capacity = integer(*v, p + "/capacity");
    if (*c.capacity < 0) throw ScenarioError(p + "/capacity", "must be >= 0");
  }
  if (auto* v = optional_field(pl, "epsilon")) c.epsilon = number(*v, p + "/epsilon");
  if (auto* v = optional_field(pl, "time_limit")) {
    c.time_limit = number(*v, p + "/time_limit");
    if (!(c.time_limit > 0)) throw ScenarioError(p + "/time_limit", "must be positive");
  }
  if (auto* v = optional_field(pl, "big_m")) {
    c.big_m = number(*v, p + "/big_m");
    if (c.big_m < 0) throw ScenarioError(p + "/big_m", "must be >= 0");
  }
  if (auto* v = optional_field(pl, "aux_node_vars")) {
    if (!v->is_boolean()) throw ScenarioError(p + "/aux_node_vars", "expected true or false");
    c.aux_node_vars = v->get<bool>();
  }
}

}  // namespace

void Scenario::reseed(std::uint64_t s) {
  seed = s;
  if (!explicit_positions) initial_positions = place_in_cells(grid, initial_counts, seed);
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", std::string("not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"version", "name", "description", "grid", "initial", "constants", "formulas", "formula", "planner",
                     "regions", "output"});
  const auto version = integer(require(j, "", "version"), "/version");
  if (version != 1) throw ScenarioError("/version", "unsupported version " + std::to_string(version));
  Scenario s;
  if (auto* n = optional_field(j, "name")) s.name = text(*n, "/name");
  read_grid(s, require(j, "", "grid"));
  read_initial(s, require(j, "", "initial"));

  if (auto* cs = optional_field(j, "constants")) {
    if (!cs->is_object()) throw ScenarioError("/constants", "expected an object");
    for (auto it = cs->begin(); it != cs->end(); ++it)
      s.bindings.constants[it.key()] = number(it.value(), child("/constants", it.key()));
  }
  if (auto* fs = optional_field(j, "formulas")) {
    if (!fs->is_array()) throw ScenarioError("/formulas", "expected an array of {name, formula}");
    for (std::size_t i = 0; i < fs->size(); ++i) {
      const std::string ip = child("/formulas", i);
      const auto& item = (*fs)[i];
      check_keys(item, ip, {"name", "formula", "description"});
      const auto name = text(require(item, ip, "name"), ip + "/name");
      if (s.bindings.formulas.count(name) || s.bindings.constants.count(name))
        throw ScenarioError(ip + "/name", "name '" + name + "' is already defined");
      s.bindings.formulas.emplace(name, parse_at(text(require(item, ip, "formula"), ip + "/formula"), s.bindings,
                                                 ip + "/formula"));
    }
  }
  s.formula_text = text(require(j, "", "formula"), "/formula");
  s.formula = parse_at(s.formula_text, s.bindings, "/formula");
  try {
    planning_steps(s.formula, s.grid.step);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("/formula", e.what());
  }

  if (auto* pl = optional_field(j, "planner")) read_planner(s, *pl);
  if (auto* rs = optional_field(j, "regions")) {
    if (!rs->is_array()) throw ScenarioError("/regions", "expected an array");
    for (std::size_t i = 0; i < rs->size(); ++i) {
      const std::string ip = child("/regions", i);
      const auto& item = (*rs)[i];
      check_keys(item, ip, {"name", "color", "cells"});
      Region r;
      r.name = text(require(item, ip, "name"), ip + "/name");
      if (auto* c = optional_field(item, "color")) r.color = text(*c, ip + "/color");
      const auto& cells = require(item, ip, "cells");
      if (!cells.is_array()) throw ScenarioError(ip + "/cells", "expected an array of [row, col]");
      for (std::size_t k = 0; k < cells.size(); ++k) r.cells.push_back(cell_at(cells[k], child(ip + "/cells", k), s.grid.side()));
      s.regions.push_back(std::move(r));
    }
  }
  if (auto* out = optional_field(j, "output")) {
    check_keys(*out, "/output", {"dir", "sample_dt"});
    if (auto* d = optional_field(*out, "dir")) s.output_dir = text(*d, "/output/dir");
    if (auto* d = optional_field(*out, "sample_dt")) {
      s.sample_dt = number(*d, "/output/sample_dt");
      if (!(s.sample_dt > 0)) throw ScenarioError("/output/sample_dt", "must be positive");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace spatel
