#include "spatel/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spatel/analysis.hpp"
#include "spatel/milp/lp_format.hpp"
#include "spatel/monitor.hpp"
#include "spatel/scenario.hpp"

namespace spatel {

namespace fs = std::filesystem;

namespace {

/// Bad user input: maps to kExitInputError.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::string> mode;
  std::optional<double> alpha;
  std::optional<double> time_limit;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> capacity;
  std::optional<std::string> out;
  bool verbose = false;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

Scenario load(const std::string& path, const Overrides& o) {
  Scenario s = parse_scenario(slurp(path));
  if (o.mode) {
    try {
      s.planner.mode = plan_mode_from_string(*o.mode);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("--mode: ") + e.what());
    }
  }
  if (o.alpha) s.planner.alpha = *o.alpha;
  if (o.time_limit) s.planner.time_limit = *o.time_limit;
  if (o.capacity) s.planner.capacity = *o.capacity;
  if (o.seed) s.reseed(*o.seed);
  if (o.out) s.output_dir = *o.out;
  if (o.verbose) s.planner.log = &std::clog;
  try {
    s.planner.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return s;
}

int exit_code(PlanStatus s) {
  switch (s) {
    case PlanStatus::Optimal: return kExitOk;
    case PlanStatus::BestEffort: return kExitBestEffort;
    case PlanStatus::TimeLimit: return kExitTimeLimit;
  }
  return kExitFailure;
}

nlohmann::ordered_json stats_json(const milp::SolveStats& s) {
  nlohmann::ordered_json j;
  j["nodes"] = s.nodes;
  j["lp_iterations"] = s.lp_iterations;
  j["seconds"] = s.seconds;
  j["root_bound"] = s.root_bound;
  j["max_violation"] = s.max_violation;
  return j;
}

void write_summary(const fs::path& path, const Scenario& sc, const FlowPlan& p, const PlanReport* r,
                   double seconds) {
  nlohmann::ordered_json j;
  j["scenario"] = sc.name;
  j["status"] = to_string(p.status);
  j["mode"] = to_string(p.mode);
  j["steps"] = p.steps();
  j["objective"] = p.objective;
  j["robustness"] = p.robustness;
  j["monitored_robustness"] = p.monitored_robustness;
  j["verdict"] = to_string(verdict_of(p.monitored_robustness));
  j["displacement_total"] = p.displacement_total;
  if (r) {
    j["variables"] = r->variables;
    j["constraints"] = r->constraints;
    j["predicate_binaries"] = r->predicate_binaries;
    j["strict_solve"] = stats_json(r->strict);
    if (r->violation) j["violation_solve"] = stats_json(*r->violation);
  }
  j["wall_seconds"] = seconds;
  auto out = open_out(path);
  out << j.dump(1) << '\n';
}

void write_plan(const fs::path& path, const FlowPlan& p) {
  auto out = open_out(path);
  write_plan_json(out, p);
}

FlowPlan read_plan(const fs::path& path) {
  std::istringstream in(slurp(path));
  try {
    return read_plan_json(in);
  } catch (const std::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string frame_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%03d.svg", i);
  return buf;
}

void write_frames(const fs::path& dir, const Scenario& sc, const std::vector<SwarmState>& states) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto out = open_out(dir / frame_name(static_cast<int>(i)));
    SvgOptions opt;
    opt.title = (sc.name.empty() ? std::string() : sc.name + "  ") + "t = " + format_number(states[i].time);
    render_svg(out, sc.grid, states[i].positions, sc.regions, opt);
  }
}

/// Reads `t,robot,x,y` rows into one state per distinct time.
std::vector<SwarmState> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,robot,x,y", 0) != 0)
    throw InputError("trajectory csv must start with the header t,robot,x,y");
  std::map<double, std::map<int, Point>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    double t, x, y;
    int r;
    char tail;
    if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf%c", &t, &r, &x, &y, &tail) != 4 || r < 0)
      throw InputError("trajectory csv line " + std::to_string(lineno) + ": expected t,robot,x,y");
    if (!rows[t].emplace(r, Point{x, y}).second)
      throw InputError("trajectory csv line " + std::to_string(lineno) + ": duplicate robot " + std::to_string(r));
  }
  std::vector<SwarmState> out;
  std::size_t robots = 0;
  for (const auto& [t, m] : rows) {
    SwarmState s;
    s.time = t;
    int expect = 0;
    for (const auto& [r, p] : m) {
      if (r != expect++) throw InputError("trajectory csv at t=" + format_number(t) + ": robot ids must be 0..N-1");
      s.positions.push_back(p);
    }
    if (out.empty()) robots = s.positions.size();
    if (s.positions.size() != robots) throw InputError("trajectory csv: robot count changes at t=" + format_number(t));
    out.push_back(std::move(s));
  }
  if (out.empty()) throw InputError("trajectory csv has no rows");
  return out;
}

/// Occupancy at every step boundary k*step found in the trajectory.
std::vector<OccupancyMatrix> boundary_frames(const std::vector<SwarmState>& states, const GridConfig& g) {
  std::vector<OccupancyMatrix> frames;
  for (const auto& s : states) {
    const double k = s.time / g.step;
    if (std::abs(k - std::round(k)) > 1e-6) continue;
    if (std::lround(k) != static_cast<long>(frames.size()))
      throw InputError("trajectory csv misses the boundary t=" + format_number(frames.size() * g.step));
    try {
      frames.push_back(occupancy_of(g, s.positions));
    } catch (const std::out_of_range& e) {
      throw InputError("trajectory csv at t=" + format_number(s.time) + ": " + e.what());
    }
  }
  return frames;
}

// --- subcommands ---

int cmd_plan(const std::string& path, const Overrides& o, std::ostream& out) {
  const Scenario sc = load(path, o);
  const auto t0 = std::chrono::steady_clock::now();
  PlanReport report;
  FlowPlan p;
  try {
    p = plan(sc.grid, sc.planner, sc.initial_counts, sc.formula, &report);
  } catch (const PlanTimeout& e) {
    out << "time limit: " << e.what() << '\n';
    return kExitTimeLimit;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir = sc.output_dir;
  write_plan(dir / "plan.json", p);
  write_summary(dir / "summary.json", sc, p, &report, secs);
  out << "status " << to_string(p.status) << ", rho " << format_number(p.robustness) << ", monitored "
      << format_number(p.monitored_robustness) << ", displacement " << p.displacement_total << ", objective "
      << format_number(p.objective) << '\n';
  out << "wrote " << (dir / "plan.json").string() << '\n';
  return exit_code(p.status);
}

int cmd_simulate(const std::string& path, const std::optional<std::string>& plan_path,
                 std::optional<double> sample_dt, const Overrides& o, std::ostream& out) {
  const Scenario sc = load(path, o);
  const fs::path dir = sc.output_dir;
  FlowPlan p;
  if (plan_path) {
    p = read_plan(*plan_path);
  } else {
    try {
      p = plan(sc.grid, sc.planner, sc.initial_counts, sc.formula);
    } catch (const PlanTimeout& e) {
      out << "time limit: " << e.what() << '\n';
      return kExitTimeLimit;
    }
    write_plan(dir / "plan.json", p);
  }
  Trajectory t;
  try {
    t = simulate(p, sc.initial_positions, sc.grid);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const double dt = sample_dt.value_or(sc.sample_dt > 0 ? sc.sample_dt : sc.grid.step);
  {
    auto csv = open_out(dir / "trajectory.csv");
    write_trajectory_csv(csv, t, dt);
  }
  write_frames(dir / "frames", sc, t.boundaries);
  out << "simulated " << t.steps() << " steps, " << t.segments.size() << " moves; wrote "
      << (dir / "trajectory.csv").string() << " and " << t.boundaries.size() << " frames\n";
  return exit_code(p.status);
}

int cmd_monitor(const std::string& input, const std::optional<std::string>& formula_path,
                const std::optional<std::string>& scenario_path, std::optional<double> step, std::ostream& out) {
  if (!formula_path && !scenario_path) throw InputError("monitor needs --formula or --scenario");
  std::optional<Scenario> sc;
  if (scenario_path) sc = parse_scenario(slurp(*scenario_path));
  Spatel f = sc ? sc->formula : Spatel::spatial(Tssl::top());
  if (formula_path) f = parse_program(slurp(*formula_path), sc ? sc->bindings : Bindings{}).formula;

  const std::string text = slurp(input);
  std::vector<OccupancyMatrix> frames;
  double dt = step.value_or(sc ? sc->grid.step : 1.0);
  if (text.rfind("t,robot,x,y", 0) == 0) {
    if (!sc) throw InputError("a trajectory csv needs --scenario for the grid");
    GridConfig g = sc->grid;
    g.step = dt;
    std::istringstream in(text);
    frames = boundary_frames(read_trajectory_csv(in), g);
  } else {
    std::istringstream in(text);
    try {
      frames = read_frames_csv(in);
    } catch (const std::runtime_error& e) {
      throw InputError(input + ": " + e.what());
    }
  }
  if (frames.empty()) throw InputError(input + ": no frames");
  if (!(dt > 0)) throw InputError("--step must be positive");
  const QtsSignal signal = QtsSignal::from_occupancy(frames, dt);
  const int last = signal.last_step() - max_step_touched(f, dt);
  if (last < 0)
    throw InputError("the formula needs " + std::to_string(max_step_touched(f, dt) + 1) + " frames, got " +
                     std::to_string(frames.size()));
  out << "k,rho,verdict\n";
  for (int k = 0; k <= last; ++k) {
    const double r = spatel_robustness(f, signal, k);
    out << k << ',' << format_number(r) << ',' << to_string(verdict_of(r)) << '\n';
  }
  return kExitOk;
}

int cmd_export_lp(const std::string& path, const std::optional<std::string>& lp, const Overrides& o,
                  std::ostream& out) {
  const Scenario sc = load(path, o);
  const auto prob = build_problem(sc.grid, sc.planner, sc.initial_counts, sc.formula);
  const fs::path target = lp ? fs::path(*lp) : fs::path(sc.output_dir) / "model.lp";
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  milp::export_lp(prob.model, target);
  out << "wrote " << target.string() << ": " << prob.model.var_count() << " variables, "
      << prob.model.constraint_count() << " constraints, " << prob.steps << " steps\n";
  return kExitOk;
}

int cmd_import_sol(const std::string& path, const std::string& sol_path, double tolerance, const Overrides& o,
                   std::ostream& out, std::ostream& err) {
  const Scenario sc = load(path, o);
  const auto prob = build_problem(sc.grid, sc.planner, sc.initial_counts, sc.formula);
  std::vector<std::string> warnings;
  milp::Solution sol;
  try {
    sol = milp::import_solution(prob.model, sol_path, &warnings, tolerance);
  } catch (const milp::SolutionError& e) {
    throw InputError(sol_path + ": " + e.what());
  }
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  // The point satisfies the strict model, so it is a plan with rho >= epsilon.
  FlowPlan p;
  try {
    p = finish_plan(prob, sol, sc.grid, PlanMode::Exact, PlanStatus::Optimal);
  } catch (const PlanningError& e) {
    throw InputError(sol_path + ": " + e.what());
  }
  const fs::path dir = sc.output_dir;
  write_plan(dir / "plan.json", p);
  write_summary(dir / "summary.json", sc, p, nullptr, 0);
  out << "imported " << sol_path << ": objective " << format_number(p.objective) << ", rho "
      << format_number(p.robustness) << ", monitored " << format_number(p.monitored_robustness) << " ("
      << to_string(verdict_of(p.monitored_robustness)) << "), displacement " << p.displacement_total << '\n';
  return p.monitored_robustness >= 0 ? kExitOk : kExitBestEffort;
}

int cmd_render(const std::string& path, const std::optional<std::string>& traj_path,
               const std::optional<std::string>& plan_path, const Overrides& o, std::ostream& out) {
  const Scenario sc = load(path, o);
  std::vector<SwarmState> states;
  if (traj_path) {
    std::istringstream in(slurp(*traj_path));
    states = read_trajectory_csv(in);
  } else if (plan_path) {
    try {
      states = simulate(read_plan(*plan_path), sc.initial_positions, sc.grid).boundaries;
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  } else {
    states.push_back(SwarmState{0, sc.initial_positions});
  }
  write_frames(fs::path(sc.output_dir) / "frames", sc, states);
  out << "wrote " << states.size() << " frames to " << (fs::path(sc.output_dir) / "frames").string() << '\n';
  return kExitOk;
}

void add_overrides(CLI::App* c, Overrides& o, bool planner_flags) {
  if (planner_flags) {
    c->add_option("--mode", o.mode, "exact | relaxed");
    c->add_option("--alpha", o.alpha, "robustness weight in the objective");
    c->add_option("--time-limit", o.time_limit, "solver time limit in seconds");
    c->add_option("--capacity", o.capacity, "per-cell robot cap");
    c->add_flag("-v,--verbose", o.verbose, "solver progress on stderr");
  }
  c->add_option("--seed", o.seed, "seed for in-cell placement");
  c->add_option("--out", o.out, "output directory");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Swarm planning and monitoring with spatial-temporal logic", "spatel"};
  app.require_subcommand(1);
  Overrides o;
  std::string scenario, input, solution;
  std::optional<std::string> plan_path, formula_path, scenario_path, traj_path, lp_path;
  std::optional<double> sample_dt, step;
  double tolerance = 1e-6;

  auto* plan_cmd = app.add_subcommand("plan", "solve the planning MILP; writes plan.json and summary.json");
  plan_cmd->add_option("scenario", scenario)->required();
  add_overrides(plan_cmd, o, true);

  auto* sim_cmd = app.add_subcommand("simulate", "run the low-level controller; writes trajectory.csv and frames");
  sim_cmd->add_option("scenario", scenario)->required();
  sim_cmd->add_option("--plan", plan_path, "use an existing plan.json instead of planning");
  sim_cmd->add_option("--sample-dt", sample_dt, "trajectory sampling period");
  add_overrides(sim_cmd, o, true);

  auto* mon_cmd = app.add_subcommand("monitor", "robustness of a frames or trajectory csv at every start step");
  mon_cmd->add_option("input", input)->required();
  mon_cmd->add_option("--formula", formula_path, "formula program file");
  mon_cmd->add_option("--scenario", scenario_path, "scenario supplying grid, bindings and formula");
  mon_cmd->add_option("--step", step, "sampling step of the frames");

  auto* lp_cmd = app.add_subcommand("export-lp", "write the planning MILP in LP format");
  lp_cmd->add_option("scenario", scenario)->required();
  lp_cmd->add_option("-o,--output", lp_path, "LP file (default <out>/model.lp)");
  add_overrides(lp_cmd, o, true);

  auto* imp_cmd = app.add_subcommand("import-sol", "build a plan from an external solution file");
  imp_cmd->add_option("scenario", scenario)->required();
  imp_cmd->add_option("solution", solution)->required();
  imp_cmd->add_option("--tolerance", tolerance, "feasibility tolerance")->capture_default_str();
  add_overrides(imp_cmd, o, true);

  auto* ren_cmd = app.add_subcommand("render", "write SVG frames of a trajectory, a plan or the initial state");
  ren_cmd->add_option("scenario", scenario)->required();
  ren_cmd->add_option("--trajectory", traj_path, "trajectory csv");
  ren_cmd->add_option("--plan", plan_path, "plan.json to simulate and draw");
  add_overrides(ren_cmd, o, false);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (plan_cmd->parsed()) return cmd_plan(scenario, o, out);
    if (sim_cmd->parsed()) return cmd_simulate(scenario, plan_path, sample_dt, o, out);
    if (mon_cmd->parsed()) return cmd_monitor(input, formula_path, scenario_path, step, out);
    if (lp_cmd->parsed()) return cmd_export_lp(scenario, lp_path, o, out);
    if (imp_cmd->parsed()) return cmd_import_sol(scenario, solution, tolerance, o, out, err);
    if (ren_cmd->parsed()) return cmd_render(scenario, traj_path, plan_path, o, out);
  } catch (const ScenarioError& e) {
    err << "scenario error at " << e.what() << '\n';
    return kExitInputError;
  } catch (const ParseError& e) {
    err << "formula error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace spatel
