#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatel/formula.hpp"
#include "spatel/grid.hpp"
#include "spatel/lowlevel.hpp"
#include "spatel/parser.hpp"
#include "spatel/planner.hpp"

namespace spatel {

/// Schema violation; `pointer` is the JSON pointer of the offending value.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Version 1 scenario file.
///
///   {
///     "version": 1,
///     "name": "...",
///     "grid": {"depth": 2, "side_length": 4, "max_speed": 2, "step": 1, "robot_count": 40},
///     "initial": {"counts": [[...], ...], "seed": 7}  or  {"positions": [[x, y], ...]},
///     "constants": {"gamma1": 5},
///     "formulas": [{"name": "phi1", "formula": "..."}],
///     "formula": "...",
///     "planner": {"alpha": 0, "mode": "exact", "running_cost": "total_displacement",
///                 "capacity": 3, "epsilon": 0, "time_limit": 600},
///     "regions": [{"name": "avoid", "color": "#e63946", "cells": [[2, 2]]}],
///     "output": {"dir": "out", "sample_dt": 0.25}
///   }
///
/// Named formulas may use constants and earlier names. Only "version",
/// "grid", "initial" and "formula" are required.
struct Scenario {
  std::string name;
  GridConfig grid;
  OccupancyMatrix initial_counts;
  std::vector<Point> initial_positions;
  std::uint64_t seed = 0;
  bool explicit_positions = false;
  Bindings bindings;
  std::string formula_text;
  Spatel formula = Spatel::spatial(Tssl::top());
  PlannerConfig planner;
  std::vector<Region> regions;
  std::string output_dir = "out";
  double sample_dt = 0;  // 0: one sample per step

  /// Re-draws in-cell positions (only for count-based initial conditions).
  void reseed(std::uint64_t s);
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace spatel
