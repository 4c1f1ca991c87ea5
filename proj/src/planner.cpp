#include "spatel/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "spatel/analysis.hpp"
#include "spatel/monitor.hpp"

namespace spatel {

using milp::LinExpr;
using milp::Status;

const char* to_string(PlanMode m) { return m == PlanMode::Exact ? "exact" : "relaxed"; }

PlanMode plan_mode_from_string(const std::string& s) {
  if (s == "exact") return PlanMode::Exact;
  if (s == "relaxed" || s == "relaxed_round") return PlanMode::RelaxedRound;
  throw std::invalid_argument("unknown planning mode '" + s + "' (expected exact or relaxed)");
}

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Optimal: return "optimal";
    case PlanStatus::BestEffort: return "best_effort";
    case PlanStatus::TimeLimit: return "time_limit";
  }
  return "?";
}

void PlannerConfig::validate() const {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be a finite value >= 0");
  if (!std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite");
  if (capacity && *capacity < 0) throw std::invalid_argument("capacity must be >= 0");
  if (!(time_limit > 0)) throw std::invalid_argument("time limit must be positive");
}

int planning_steps(const Spatel& f, double step) {
  const int k = std::max({1, to_steps(horizon(f), step), max_step_touched(f, step)});
  return k;
}

PlanningProblem build_problem(const GridConfig& cfg, const PlannerConfig& pcfg, const OccupancyMatrix& n0,
                              const Spatel& phi, bool violation_mode) {
  cfg.validate();
  pcfg.validate();
  if (n0.depth() != cfg.depth) throw std::invalid_argument("initial occupancy does not match the grid depth");
  if (n0.total() != cfg.robot_count)
    throw std::invalid_argument("initial occupancy holds " + std::to_string(n0.total()) + " robots, expected " +
                                std::to_string(cfg.robot_count));
  PlanningProblem p;
  p.nnf = to_nnf(phi, cfg.step);
  p.steps = planning_steps(p.nnf, cfg.step);
  p.violation_mode = violation_mode;
  const FlowDomain domain = pcfg.mode == PlanMode::Exact ? FlowDomain::Integer : FlowDomain::Continuous;
  p.flows = encode_dynamics(p.model, n0, p.steps, {domain, pcfg.capacity});
  EncodeOptions eo;
  eo.step = cfg.step;
  eo.big_m = pcfg.big_m;
  eo.robustness = true;
  eo.aux_node_vars = pcfg.aux_node_vars;
  // Integral flows and thresholds leave rho on the integers, which lets the
  // solver prune on the objective lattice.
  const auto sites = predicate_sites(p.nnf);
  eo.integral_rho = pcfg.mode == PlanMode::Exact &&
                    std::all_of(sites.begin(), sites.end(), [](const PredicateSite& s) {
                      return s.threshold == std::floor(s.threshold);
                    });
  if (!violation_mode) {
    // With alpha = 0 rho is not rewarded; the encoding is monotone in rho,
    // so any plan feasible for some rho >= epsilon is feasible at epsilon.
    const double lower = eo.integral_rho ? std::ceil(pcfg.epsilon) : pcfg.epsilon;
    eo.rho_lower = lower;
    if (pcfg.alpha == 0) eo.rho_upper = lower;
  }
  if (!violation_mode && pcfg.epsilon > static_cast<double>(n0.total()) + max_abs_threshold(p.nnf) + 1)
    throw std::invalid_argument("epsilon exceeds the largest achievable robustness");
  p.formula = encode_formula(p.model, p.flows, p.nnf, eo);
  pin(p.model, p.formula.root);
  const milp::VarId rho = *p.formula.rho;
  LinExpr objective;
  if (violation_mode) {
    objective = LinExpr(rho, -1);
  } else {
    if (pcfg.alpha != 0) objective.add(rho, -pcfg.alpha);
    if (pcfg.running_cost == RunningCost::TotalDisplacement)
      for (const auto& step : p.flows.flow)
        for (auto v : step) objective.add(v, 1);
  }
  p.model.set_objective(objective);
  p.model.seal();
  return p;
}

namespace {

std::int64_t integral(double x, const char* what) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-6) throw PlanningError(std::string(what) + " value " + format_number(x) + " is not integral");
  return static_cast<std::int64_t>(r);
}

// Occupancies after applying one step of integer flows.
std::vector<std::int64_t> advance(const std::vector<std::int64_t>& n, const std::vector<Edge>& edges,
                                  const std::vector<std::int64_t>& f, int side) {
  std::vector<std::int64_t> next = n;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    next[edges[e].from.row * side + edges[e].from.col] -= f[e];
    next[edges[e].to.row * side + edges[e].to.col] += f[e];
  }
  return next;
}

}  // namespace

std::vector<std::vector<std::int64_t>> extract_flows(const std::vector<double>& values, const FlowVars& fv) {
  std::vector<std::vector<std::int64_t>> out(fv.flow.size());
  for (std::size_t k = 0; k < fv.flow.size(); ++k)
    for (auto v : fv.flow[k]) {
      const auto f = integral(values.at(static_cast<std::size_t>(v.index)), "flow");
      if (f < 0) throw PlanningError("negative flow in solution");
      out[k].push_back(f);
    }
  return out;
}

std::vector<OccupancyMatrix> extract_occupancies(const std::vector<double>& values, const FlowVars& fv) {
  const auto flows = extract_flows(values, fv);
  std::vector<OccupancyMatrix> out;
  for (std::size_t k = 0; k < fv.occ.size(); ++k) {
    std::vector<std::int64_t> counts;
    for (auto v : fv.occ[k]) counts.push_back(integral(values.at(static_cast<std::size_t>(v.index)), "occupancy"));
    if (k > 0) {
      const auto expected = advance(out.back().counts(), fv.edges, flows[k - 1], fv.side());
      if (expected != counts)
        throw PlanningError("occupancy at step " + std::to_string(k) + " does not follow from the flows");
    }
    out.emplace_back(fv.depth, std::move(counts));
  }
  return out;
}

RoundedFlows round_relaxed(const std::vector<std::vector<double>>& flows, const OccupancyMatrix& n0) {
  const int side = n0.side();
  const auto edges = grid_edges(n0.depth());
  std::vector<std::vector<int>> out_edges(static_cast<std::size_t>(side) * side);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    out_edges[edges[e].from.row * side + edges[e].from.col].push_back(e);

  RoundedFlows r;
  r.occupancies.push_back(n0);
  for (const auto& step : flows) {
    if (step.size() != edges.size()) throw std::invalid_argument("round_relaxed: flow table has the wrong width");
    const auto& n = r.occupancies.back().counts();
    std::vector<std::int64_t> f(edges.size(), 0);
    for (std::size_t cell = 0; cell < out_edges.size(); ++cell) {
      const auto& es = out_edges[cell];
      double total = 0;
      for (int e : es) total += std::max(0.0, step[e]);
      if (total <= 0) continue;
      // Snap near-integers so solver noise does not decide the rounding.
      auto snap = [](double x) { return std::abs(x - std::round(x)) < 1e-9 ? std::round(x) : x; };
      const std::int64_t avail = n[cell];
      std::int64_t target = std::min<std::int64_t>(avail, std::llround(snap(total)));
      std::vector<double> share;
      for (int e : es) share.push_back(snap(std::max(0.0, step[e])));
      std::int64_t floors = 0;
      for (double s : share) floors += static_cast<std::int64_t>(std::floor(s));
      if (floors > avail) {
        // Fewer robots than the fractional plan moved: apportion what is here.
        for (double& s : share) s = snap(s * static_cast<double>(avail) / total);
        target = avail;
        floors = 0;
        for (double s : share) floors += static_cast<std::int64_t>(std::floor(s));
      }
      std::vector<std::size_t> order(es.size());
      std::iota(order.begin(), order.end(), 0);
      // Remainders on a 1e-9 grid, so near-equal ones tie and keep edge order.
      std::vector<long long> rem;
      for (double s : share) rem.push_back(std::llround((s - std::floor(s)) * 1e9));
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
      for (std::size_t i = 0; i < es.size(); ++i) f[es[i]] = static_cast<std::int64_t>(std::floor(share[i]));
      std::int64_t left = std::max<std::int64_t>(0, target - floors);
      for (std::size_t i = 0; left > 0 && i < order.size(); ++i, --left) ++f[es[order[i]]];
    }
    r.occupancies.emplace_back(n0.depth(), advance(n, edges, f, side));
    r.flows.push_back(std::move(f));
  }
  return r;
}

FlowPlan make_plan(int depth, double step, const std::vector<std::vector<std::int64_t>>& flows,
                   const OccupancyMatrix& n0) {
  if (n0.depth() != depth) throw std::invalid_argument("make_plan: depth mismatch");
  const auto edges = grid_edges(depth);
  FlowPlan p;
  p.depth = depth;
  p.step = step;
  p.occupancies.push_back(n0);
  for (std::size_t k = 0; k < flows.size(); ++k) {
    if (flows[k].size() != edges.size()) throw std::invalid_argument("make_plan: flow table has the wrong width");
    const auto& n = p.occupancies.back().counts();
    std::vector<std::int64_t> out(n.size(), 0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto f = flows[k][e];
      if (f < 0) throw std::invalid_argument("make_plan: negative flow");
      if (f == 0) continue;
      p.flows.push_back({static_cast<int>(k), edges[e].from, edges[e].to, f});
      out[edges[e].from.row * n0.side() + edges[e].from.col] += f;
      p.displacement_total += f;
    }
    for (std::size_t c = 0; c < n.size(); ++c)
      if (out[c] > n[c])
        throw std::invalid_argument("make_plan: step " + std::to_string(k) + " moves more robots out of a cell than it holds");
    p.occupancies.emplace_back(depth, advance(n, edges, flows[k], n0.side()));
  }
  return p;
}

FlowPlan plan(const GridConfig& cfg, const PlannerConfig& pcfg, const OccupancyMatrix& n0, const Spatel& phi,
              PlanReport* report) {
  const auto start = std::chrono::steady_clock::now();
  PlanningProblem problem = build_problem(cfg, pcfg, n0, phi, false);
  milp::SolveOptions so;
  so.time_limit = pcfg.time_limit;
  so.cancel = pcfg.cancel;
  so.kernels = pcfg.kernels;
  so.log = pcfg.log;
  milp::Solution sol = milp::solve(problem.model, so);
  if (report) {
    report->strict = sol.stats;
    report->variables = problem.model.var_count();
    report->constraints = problem.model.constraint_count();
    report->predicate_binaries = problem.formula.predicate_binaries;
  }
  PlanStatus status = PlanStatus::Optimal;
  if (sol.status == Status::Infeasible) {
    const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    so.time_limit = std::max(1e-3, pcfg.time_limit - used);
    problem = build_problem(cfg, pcfg, n0, phi, true);
    sol = milp::solve(problem.model, so);
    if (report) report->violation = sol.stats;
    if (sol.status == Status::Infeasible) throw PlanningError("dynamics are infeasible (internal error)");
    status = PlanStatus::BestEffort;
  }
  if (sol.status == Status::TimeLimit) {
    if (!sol.has_values()) throw PlanTimeout("time limit reached before any plan was found");
    status = PlanStatus::TimeLimit;
  } else if (sol.status != Status::Optimal) {
    throw PlanningError(std::string("unexpected solver status ") + milp::to_string(sol.status));
  }

  return finish_plan(problem, sol, cfg, pcfg.mode, status);
}

FlowPlan finish_plan(const PlanningProblem& problem, const milp::Solution& sol, const GridConfig& cfg,
                     PlanMode mode, PlanStatus status) {
  FlowPlan out;
  const OccupancyMatrix n0 = [&] {
    std::vector<std::int64_t> c;
    for (auto v : problem.flows.occ.at(0)) c.push_back(static_cast<std::int64_t>(problem.model.var(v).lower));
    return OccupancyMatrix(problem.flows.depth, c);
  }();
  if (mode == PlanMode::Exact) {
    const auto frames = extract_occupancies(sol.values, problem.flows);
    out = make_plan(cfg.depth, cfg.step, extract_flows(sol.values, problem.flows), n0);
    if (out.occupancies != frames) throw PlanningError("plan occupancies disagree with the solver (internal error)");
  } else {
    std::vector<std::vector<double>> fractional;
    for (const auto& step : problem.flows.flow) {
      fractional.emplace_back();
      for (auto v : step) fractional.back().push_back(sol.value(v));
    }
    out = make_plan(cfg.depth, cfg.step, round_relaxed(fractional, n0).flows, n0);
  }
  out.mode = mode;
  out.status = status;
  out.robustness = sol.value(*problem.formula.rho);
  out.objective = sol.objective;
  out.monitored_robustness =
      spatel_robustness(problem.nnf, QtsSignal::from_occupancy(out.occupancies, cfg.step));
  return out;
}

namespace {

using Json = nlohmann::ordered_json;

Json cell_json(Cell c) { return Json::array({c.row, c.col}); }

Cell cell_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("plan: a cell must be [row, col]");
  return Cell{j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

void write_plan_json(std::ostream& out, const FlowPlan& plan) {
  Json j;
  j["version"] = 1;
  j["mode"] = to_string(plan.mode);
  j["status"] = to_string(plan.status);
  j["best_effort"] = plan.best_effort();
  j["depth"] = plan.depth;
  j["step"] = plan.step;
  j["steps"] = plan.steps();
  j["robustness"] = plan.robustness;
  j["monitored_robustness"] = plan.monitored_robustness;
  j["objective"] = plan.objective;
  j["displacement_total"] = plan.displacement_total;
  Json flows = Json::array();
  for (const auto& f : plan.flows)
    flows.push_back(Json{{"k", f.step}, {"from", cell_json(f.from)}, {"to", cell_json(f.to)}, {"count", f.count}});
  j["flows"] = std::move(flows);
  Json frames = Json::array();
  for (const auto& m : plan.occupancies) {
    Json rows = Json::array();
    for (int r = 0; r < m.side(); ++r) {
      Json row = Json::array();
      for (int c = 0; c < m.side(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    frames.push_back(std::move(rows));
  }
  j["occupancies"] = std::move(frames);
  out << j.dump(1) << '\n';
}

FlowPlan read_plan_json(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("plan: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw std::runtime_error("plan: unsupported version");
    FlowPlan p;
    p.mode = plan_mode_from_string(j.at("mode").get<std::string>());
    const auto status = j.at("status").get<std::string>();
    if (status == "optimal") p.status = PlanStatus::Optimal;
    else if (status == "best_effort") p.status = PlanStatus::BestEffort;
    else if (status == "time_limit") p.status = PlanStatus::TimeLimit;
    else throw std::runtime_error("plan: unknown status '" + status + "'");
    p.depth = j.at("depth").get<int>();
    p.step = j.at("step").get<double>();
    p.robustness = j.at("robustness").get<double>();
    p.monitored_robustness = j.at("monitored_robustness").get<double>();
    p.objective = j.at("objective").get<double>();
    p.displacement_total = j.at("displacement_total").get<std::int64_t>();
    for (const auto& f : j.at("flows"))
      p.flows.push_back({f.at("k").get<int>(), cell_from(f.at("from")), cell_from(f.at("to")),
                         f.at("count").get<std::int64_t>()});
    for (const auto& rows : j.at("occupancies"))
      p.occupancies.push_back(OccupancyMatrix::from_rows(rows.get<std::vector<std::vector<std::int64_t>>>()));
    if (p.occupancies.empty()) throw std::runtime_error("plan: no occupancy frames");
    for (const auto& m : p.occupancies)
      if (m.depth() != p.depth) throw std::runtime_error("plan: frame size does not match depth");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("plan: ") + e.what());
  }
}

}  // namespace spatel
