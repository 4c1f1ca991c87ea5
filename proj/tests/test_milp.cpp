#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "spatel/milp/lp_format.hpp"
#include "spatel/milp/model.hpp"
#include "spatel/milp/simplex.hpp"
#include "spatel/milp/solver.hpp"
#include "spatel/simd/kernels.hpp"
#include "support/lp_oracle.hpp"

using namespace spatel;
using namespace spatel::milp;

namespace {

std::vector<simd::Isa> isas() {
  std::vector<simd::Isa> out;
  for (auto isa : {simd::Isa::Scalar, simd::Isa::Avx2, simd::Isa::Neon})
    if (simd::available(isa)) out.push_back(isa);
  return out;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("simd kernels match the scalar reference bit for bit") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  const auto& ref = simd::kernels_for(simd::Isa::Scalar);
  INFO("active isa: " << simd::to_string(simd::kernels().isa));
  for (auto isa : isas()) {
    const auto& k = simd::kernels_for(isa);
    for (std::size_t n = 0; n < 40; ++n) {
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = u(rng);
        for (std::size_t i = 0; i < n; ++i) y[i] = (i % 3 == 0) ? -x[i] * 0.5 : u(rng);
        auto y1 = y, y2 = y;
        ref.axpy_drop(y1.data(), x.data(), 0.5, n, 1e-12);
        k.axpy_drop(y2.data(), x.data(), 0.5, n, 1e-12);
        CHECK(same_bits(y1, y2));
        const double a = u(rng);
        ref.axpy_drop(y1.data(), x.data(), a, n, 0.25);
        k.axpy_drop(y2.data(), x.data(), a, n, 0.25);
        CHECK(same_bits(y1, y2));
        ref.scale(y1.data(), 1.0 / 3.0, n);
        k.scale(y2.data(), 1.0 / 3.0, n);
        CHECK(same_bits(y1, y2));
        if (n == 0) continue;
        std::vector<double> lo(n), hi(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
          lo[i] = trial % 4 == 0 ? -INFINITY : std::round(u(rng));
          hi[i] = trial % 5 == 0 ? INFINITY : lo[i] + 2;
          if (!std::isfinite(hi[i]) && !std::isfinite(lo[i])) hi[i] = 1;
          v[i] = std::round(u(rng) * 2) / 2;  // many ties
        }
        const auto r1 = ref.max_violation(v.data(), lo.data(), hi.data(), n);
        const auto r2 = k.max_violation(v.data(), lo.data(), hi.data(), n);
        CHECK(r1.index == r2.index);
        CHECK(r1.amount == r2.amount);
      }
    }
  }
  if (!simd::available(simd::Isa::Neon))
    CHECK_THROWS_AS(simd::kernels_for(simd::Isa::Neon), std::invalid_argument);
}

TEST_CASE("max_violation returns the first maximum") {
  const auto& k = simd::kernels();
  std::vector<double> v(9, 0.0), lo(9, 0.0), hi(9, 1.0);
  v[2] = 3;
  v[7] = 3;
  auto r = k.max_violation(v.data(), lo.data(), hi.data(), v.size());
  CHECK(r.index == 2);
  CHECK(r.amount == 2);
  v[2] = 0.5;
  v[7] = 0.5;
  r = k.max_violation(v.data(), lo.data(), hi.data(), v.size());
  CHECK(r.amount <= 0);
}

TEST_CASE("model building rules") {
  Model m;
  const VarId z = m.add_binary("z");
  CHECK(m.var(z).kind == VarKind::Binary);
  CHECK(m.var(z).lower == 0);
  CHECK(m.var(z).upper == 1);
  CHECK_THROWS_AS(m.add_binary("z"), ModelError);
  CHECK_THROWS_AS(m.add_var("2x", VarKind::Continuous, 0, 1), ModelError);
  CHECK_THROWS_AS(m.add_var("x", VarKind::Continuous, 0, INFINITY), ModelError);
  CHECK_THROWS_AS(m.add_var("b", VarKind::Binary, 0, 2), ModelError);
  CHECK_THROWS_AS(m.add_constraint(LinExpr(VarId{5}), Sense::Le, 1), ModelError);
  const VarId f = m.add_var("f", VarKind::Integer, 0, 10);
  const VarId rho = m.add_var("rho", VarKind::Continuous, -5, 5);
  m.set_objective(LinExpr(f) - 2.0 * LinExpr(rho));
  CHECK(m.objective().terms().size() == 2);
  const int c = m.add_constraint(LinExpr(f) + LinExpr(f) + 3.0, Sense::Ge, 5);
  CHECK(m.constraint(c).terms.size() == 1);
  CHECK(m.constraint(c).terms[0].coef == 2);
  CHECK(m.constraint(c).rhs == 2);
  CHECK(m.find("rho") == rho);
  CHECK(!m.find("nope"));
  m.seal();
  CHECK_THROWS_AS(m.add_binary("y"), ModelError);
  CHECK_THROWS_AS(m.set_bounds(f, 0, 1), ModelError);
  Model open;
  open.add_binary("a");
  CHECK_THROWS_AS(solve(open), ModelError);
}

TEST_CASE("solver trivial cases") {
  {
    Model m;
    const VarId x = m.add_var("x", VarKind::Integer, 0, 10);
    m.add_constraint(LinExpr(x), Sense::Ge, 2.5);
    m.set_objective(LinExpr(x));
    m.seal();
    const auto s = solve(m);
    CHECK(s.status == Status::Optimal);
    CHECK(s.value(x) == 3);
    CHECK(s.objective == 3);
    const auto r = solve(m, {.mode = IntegerMode::Relaxed});
    CHECK(r.status == Status::RelaxationOnly);
    CHECK(r.value(x) == doctest::Approx(2.5));
  }
  {
    Model m;
    const VarId x = m.add_var("x", VarKind::Continuous, -10, 10);
    m.add_constraint(LinExpr(x), Sense::Ge, 1);
    m.add_constraint(LinExpr(x), Sense::Le, 0);
    m.set_objective(LinExpr(x));
    m.seal();
    CHECK(solve(m).status == Status::Infeasible);
  }
  {
    // Integer-infeasible although the relaxation is feasible.
    Model m;
    const VarId x = m.add_var("x", VarKind::Integer, 0, 10);
    m.add_constraint(2.0 * LinExpr(x), Sense::Eq, 3);
    m.seal();
    CHECK(solve(m).status == Status::Infeasible);
  }
}

TEST_CASE("knapsack against all 32 subsets") {
  const double w[5] = {4, 3, 5, 2, 6}, v[5] = {7, 4, 8, 3, 9};
  Model m;
  std::vector<VarId> x;
  LinExpr weight, value;
  for (int i = 0; i < 5; ++i) {
    x.push_back(m.add_binary("x" + std::to_string(i)));
    weight.add(x[i], w[i]);
    value.add(x[i], -v[i]);
  }
  m.add_constraint(weight, Sense::Le, 11);
  m.set_objective(value);
  m.seal();
  double best = 0;
  for (int mask = 0; mask < 32; ++mask) {
    double ww = 0, vv = 0;
    for (int i = 0; i < 5; ++i)
      if (mask >> i & 1) {
        ww += w[i];
        vv += v[i];
      }
    if (ww <= 11) best = std::max(best, vv);
  }
  const auto s = solve(m);
  REQUIRE(s.status == Status::Optimal);
  CHECK(-s.objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("simplex matches exact vertex enumeration on random LPs") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 240; ++trial) {
    const int n = 1 + trial % 8;
    const int rows = n >= 7 ? 3 : 1 + trial % 5;
    const auto lp = testing::random_lp(rng, n, rows);
    const auto exact = testing::exact_min(lp);
    REQUIRE(exact);  // planted point
    const Model m = testing::to_model(lp);
    for (auto isa : isas()) {
      DualSimplex ds(m, simd::kernels_for(isa));
      REQUIRE(ds.solve() == LpStatus::Optimal);
      CHECK(ds.objective() == doctest::Approx(exact->to_double()).epsilon(1e-9));
      CHECK(m.worst_violation(ds.values(), false).amount < 1e-9);
    }
    ++checked;
  }
  CHECK(checked == 240);
}

TEST_CASE("solve is identical under every kernel set") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto lp = testing::random_lp(rng, 10, 8);
    std::vector<VarKind> kinds(10, VarKind::Integer);
    const Model m = testing::to_model(lp, kinds);
    std::vector<double> first;
    for (auto isa : isas()) {
      SolveOptions o;
      o.kernels = &simd::kernels_for(isa);
      const auto s = solve(m, o);
      REQUIRE(s.status == Status::Optimal);
      if (first.empty()) first = s.values;
      else CHECK(same_bits(first, s.values));
    }
  }
}

TEST_CASE("infeasible LPs are detected") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto lp = testing::random_lp(rng, 1 + trial % 5, 3);
    // Contradict the first row.
    auto r = lp.rows[0];
    std::int64_t lo_act = 0, hi_act = 0;
    for (int j = 0; j < lp.n; ++j) {
      lo_act += std::min(r.a[j] * lp.lower[j], r.a[j] * lp.upper[j]);
      hi_act += std::max(r.a[j] * lp.lower[j], r.a[j] * lp.upper[j]);
    }
    r.sense = Sense::Ge;
    r.b = hi_act + 1;
    lp.rows.push_back(r);
    CHECK(!testing::exact_min(lp));
    CHECK(solve(testing::to_model(lp)).status == Status::Infeasible);
  }
}

TEST_CASE("branch and bound matches exhaustive enumeration") {
  std::mt19937_64 rng(2025);
  for (int trial = 0; trial < 40; ++trial) {
    const int bins = 2 + trial % 9;
    const int cont = trial % 3;
    auto lp = testing::random_lp(rng, bins + cont, 2 + trial % 4, false);
    std::vector<VarKind> kinds(bins + cont, VarKind::Continuous);
    for (int j = 0; j < bins; ++j) {
      lp.lower[j] = 0;
      lp.upper[j] = 1;
      kinds[j] = VarKind::Binary;
    }
    const auto exact = testing::exact_milp_min(lp, bins);
    const Model m = testing::to_model(lp, kinds);
    const auto s = solve(m);
    if (!exact) {
      CHECK(s.status == Status::Infeasible);
      continue;
    }
    REQUIRE(s.status == Status::Optimal);
    CHECK(std::abs(s.objective - exact->to_double()) <= 1e-6);
    CHECK(s.stats.max_violation <= 1e-6);
    // Weak duality: relaxation bound never above the integer optimum.
    CHECK(s.stats.root_bound <= s.objective + 1e-9);
  }
}

TEST_CASE("time limit and cancellation") {
  std::mt19937_64 rng(8);
  auto lp = testing::random_lp(rng, 12, 10);
  std::vector<VarKind> kinds(12, VarKind::Integer);
  const Model m = testing::to_model(lp, kinds);
  std::atomic<bool> stop{true};
  SolveOptions o;
  o.cancel = &stop;
  const auto s = solve(m, o);
  CHECK(s.status == Status::TimeLimit);
  o.cancel = nullptr;
  o.workers = 2;
  CHECK_THROWS_AS(solve(m, o), ModelError);
}

TEST_CASE("LP golden output") {
  Model m;
  const VarId x = m.add_var("x", VarKind::Continuous, 0, 4);
  m.add_constraint(LinExpr(x), Sense::Ge, 1.5, "lo");
  m.set_objective(2.0 * LinExpr(x));
  m.seal();
  std::ostringstream out;
  write_lp(out, m);
  CHECK(out.str() ==
        "Minimize\n"
        " obj: 2 x\n"
        "Subject To\n"
        " lo: x >= 1.5\n"
        "Bounds\n"
        " 0 <= x <= 4\n"
        "End\n");

  Model g;
  const VarId a = g.add_binary("a");
  const VarId b = g.add_var("b", VarKind::Integer, -2, 7);
  const VarId c = g.add_var("c", VarKind::Continuous, 3, 3);
  g.add_constraint(LinExpr(a) - LinExpr(b) + 0.25 * LinExpr(c), Sense::Le, -1, "r1");
  g.add_constraint(-1.0 * LinExpr(b), Sense::Eq, 0);
  g.set_objective(LinExpr(b) - 1.0 * LinExpr(a) + 5.0);
  g.seal();
  std::ostringstream out2;
  write_lp(out2, g);
  CHECK(out2.str() ==
        "Minimize\n"
        " obj: - a + b + 5\n"
        "Subject To\n"
        " r1: a - b + 0.25 c <= -1\n"
        " c1: - b = 0\n"
        "Bounds\n"
        " 0 <= a <= 1\n"
        " -2 <= b <= 7\n"
        " c = 3\n"
        "Binaries\n"
        " a\n"
        "Generals\n"
        " b\n"
        "End\n");
}

TEST_CASE("LP rows wrap") {
  Model m;
  LinExpr e;
  for (int i = 0; i < 60; ++i) e.add(m.add_var("long_variable_name_" + std::to_string(i), VarKind::Continuous, 0, 1), 1);
  m.add_constraint(e, Sense::Le, 3);
  m.seal();
  std::ostringstream out;
  write_lp(out, m);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    CHECK(line.size() <= 100);
    ++lines;
  }
  CHECK(lines > 70);
}

TEST_CASE("solution import") {
  Model m;
  const VarId x = m.add_var("x", VarKind::Integer, 0, 5);
  const VarId y = m.add_var("y", VarKind::Continuous, 1, 5);
  m.add_constraint(LinExpr(x) + LinExpr(y), Sense::Ge, 3, "cover");
  m.set_objective(LinExpr(x) + 2.0 * LinExpr(y));
  m.seal();

  const auto own = solve(m);
  std::stringstream file;
  file << "# exported\n";
  write_solution(file, m, own.values);
  const auto back = read_solution(file, m);
  CHECK(back.objective == doctest::Approx(own.objective).epsilon(1e-12));

  std::vector<std::string> warnings;
  std::stringstream partial("x 2\n");
  const auto p = read_solution(partial, m, &warnings);
  CHECK(p.value(y) == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("'y'") != std::string::npos);

  std::stringstream bad("x 0\ny 1\n");
  try {
    read_solution(bad, m);
    FAIL("expected a validation error");
  } catch (const SolutionError& e) {
    CHECK(std::string(e.what()).find("cover") != std::string::npos);
  }
  std::stringstream frac("x 1.5\ny 2\n");
  CHECK_THROWS_AS(read_solution(frac, m), SolutionError);
  std::stringstream unknown("z 1\n");
  CHECK_THROWS_AS(read_solution(unknown, m), SolutionError);
  std::stringstream garbage("x one\n");
  CHECK_THROWS_AS(read_solution(garbage, m), SolutionError);
}
