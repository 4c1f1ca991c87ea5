#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatel/milp/model.hpp"
#include "spatel/milp/solver.hpp"

namespace spatel::milp {

/// CPLEX LP text: Minimize, Subject To, Bounds, Binaries, Generals, End, in
/// that order. Numbers use the shortest round-trip form; long rows wrap.
void write_lp(std::ostream& out, const Model& model);
void export_lp(const Model& model, const std::filesystem::path& path);

class SolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads `name value` lines (blank lines and `#` comments skipped). Missing
/// variables take their lower bound and produce a warning. The point must be
/// feasible to `tolerance`, otherwise SolutionError names the worst violation.
Solution read_solution(std::istream& in, const Model& model, std::vector<std::string>* warnings = nullptr,
                       double tolerance = 1e-6);
Solution import_solution(const Model& model, const std::filesystem::path& path,
                         std::vector<std::string>* warnings = nullptr, double tolerance = 1e-6);

/// Writes `name value` lines for every variable.
void write_solution(std::ostream& out, const Model& model, const std::vector<double>& values);

}  // namespace spatel::milp
