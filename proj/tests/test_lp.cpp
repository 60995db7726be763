#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rulecg/lp.hpp"

using namespace rulecg;

namespace {

// Dual and complementary-slackness residuals recomputed from the solution.
struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double slackness = 0.0;
};

Residuals residuals(const LinearProgram& lp, const LpSolution& s) {
  Residuals r;
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    const auto& v = lp.variables[j];
    r.primal = std::max({r.primal, v.lower - s.x[j], s.x[j] - v.upper});
  }
  std::vector<double> d(lp.variables.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = lp.variables[j].cost;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const auto& row = lp.rows[i];
    const double act = lp.row_activity(i, s.x);
    const double y = s.duals[i];
    for (const auto& e : row.entries) d[static_cast<std::size_t>(e.index)] -= y * e.value;
    switch (row.sense) {
      case RowSense::kGreaterEqual:
        r.primal = std::max(r.primal, row.rhs - act);
        r.dual = std::max(r.dual, -y);
        break;
      case RowSense::kLessEqual:
        r.primal = std::max(r.primal, act - row.rhs);
        r.dual = std::max(r.dual, y);
        break;
      case RowSense::kEqual:
        r.primal = std::max(r.primal, std::abs(act - row.rhs));
        break;
    }
    r.slackness = std::max(r.slackness, std::abs(y * (act - row.rhs)));
  }
  for (std::size_t j = 0; j < d.size(); ++j) {
    const auto& v = lp.variables[j];
    const bool at_lower = std::abs(s.x[j] - v.lower) <= 1e-9;
    const bool at_upper = std::abs(s.x[j] - v.upper) <= 1e-9;
    if (!at_lower && d[j] > 0) r.dual = std::max(r.dual, d[j]);
    if (!at_upper && d[j] < 0) r.dual = std::max(r.dual, -d[j]);
    r.slackness = std::max(r.slackness, std::abs(std::abs(d[j]) * std::min(s.x[j] - v.lower, v.upper - s.x[j])));
  }
  return r;
}

}  // namespace

TEST_SUITE("lp_engine") {
  TEST_CASE("bounds force the solution") {
    LinearProgram lp;
    const int a = lp.add_variable(0, 1, 1);
    const int b = lp.add_variable(0, 1, 1);
    lp.add_row(RowSense::kGreaterEqual, 1, {{a, 1}});
    lp.add_row(RowSense::kGreaterEqual, 1, {{b, 1}});
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(2.0));
    CHECK(s.duals[0] == doctest::Approx(1.0));
    CHECK(s.duals[1] == doctest::Approx(1.0));
  }

  TEST_CASE("textbook LP") {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
    LinearProgram lp;
    const int x = lp.add_variable(0, kInfinity, -3);
    const int y = lp.add_variable(0, kInfinity, -5);
    lp.add_row(RowSense::kLessEqual, 4, {{x, 1}});
    lp.add_row(RowSense::kLessEqual, 12, {{y, 2}});
    lp.add_row(RowSense::kLessEqual, 18, {{x, 3}, {y, 2}});
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(-36.0));
    CHECK(s.x[0] == doctest::Approx(2.0));
    CHECK(s.x[1] == doctest::Approx(6.0));
    // Strong duality: b'y equals the objective.
    CHECK(4 * s.duals[0] + 12 * s.duals[1] + 18 * s.duals[2] == doctest::Approx(-36.0));
  }

  TEST_CASE("infeasible and unbounded are reported") {
    LinearProgram inf;
    const int x = inf.add_variable(0, 1, 1);
    inf.add_row(RowSense::kGreaterEqual, 2, {{x, 1}});
    CHECK(solve_lp(inf).status == LpStatus::kInfeasible);

    LinearProgram unb;
    const int u = unb.add_variable(0, kInfinity, -1);
    const int v = unb.add_variable(0, kInfinity, 0);
    unb.add_row(RowSense::kGreaterEqual, 0, {{u, 1}, {v, -1}});
    CHECK(solve_lp(unb).status == LpStatus::kUnbounded);
  }

  TEST_CASE("malformed programs are rejected") {
    LinearProgram lp;
    lp.add_variable(1, 0, 0);
    CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
    LinearProgram dup;
    const int x = dup.add_variable(0, 1, 0);
    dup.add_row(RowSense::kLessEqual, 1, {{x, 1}, {x, 2}});
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  }

  TEST_CASE("random 5x4 LPs match vertex enumeration") {
    std::mt19937_64 rng(11);
    int optimal = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const LinearProgram lp = oracle::random_lp(rng, 5, 4);
      const LpSolution s = solve_lp(lp);
      const auto reference = oracle::vertex_enumeration(lp);
      if (!reference) {
        CHECK(s.status == LpStatus::kInfeasible);
        continue;
      }
      REQUIRE(s.status == LpStatus::kOptimal);
      ++optimal;
      CHECK(std::abs(s.objective - *reference) <= 1e-6);
      const Residuals r = residuals(lp, s);
      CHECK(r.primal <= 1e-7);
      CHECK(r.dual <= 1e-7);
      CHECK(r.slackness <= 1e-7);
    }
    CHECK(optimal > 150);
  }

  TEST_CASE("warm start after adding a column and changing bounds") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      LinearProgram lp = oracle::random_lp(rng, 6, 4);
      SimplexSolver solver(lp);
      const LpSolution first = solver.solve();
      if (first.status != LpStatus::kOptimal) continue;
      std::vector<LinearProgram::Entry> col{{0, 1.0}, {2, -2.0}};
      solver.add_column(0, 2, -1, col);
      lp.add_column(0, 2, -1, col);
      const LpSolution warm = solver.solve();
      const LpSolution cold = solve_lp(lp);
      REQUIRE(warm.status == cold.status);
      if (warm.status == LpStatus::kOptimal) CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));

      solver.set_bounds(0, lp.variables[0].lower, lp.variables[0].lower);
      lp.variables[0].upper = lp.variables[0].lower;
      const LpSolution warm2 = solver.solve();
      const LpSolution cold2 = solve_lp(lp);
      REQUIRE(warm2.status == cold2.status);
      if (warm2.status == LpStatus::kOptimal) CHECK(warm2.objective == doctest::Approx(cold2.objective).epsilon(1e-9));
    }
  }

  TEST_CASE("solving is deterministic") {
    std::mt19937_64 rng(3);
    const LinearProgram lp = oracle::random_lp(rng, 8, 6);
    const LpSolution a = solve_lp(lp);
    const LpSolution b = solve_lp(lp);
    CHECK(a.x == b.x);
    CHECK(a.duals == b.duals);
  }

  TEST_CASE("text dump lists objective, rows and bounds") {
    LinearProgram lp;
    const int x = lp.add_variable(0, 1, 2, "x");
    lp.add_row(RowSense::kGreaterEqual, 1, {{x, 1}}, "r");
    std::ostringstream out;
    write_lp(lp, out);
    const std::string text = out.str();
    CHECK(text.find("minimize") != std::string::npos);
    CHECK(text.find("r:") != std::string::npos);
    CHECK(text.find("bounds") != std::string::npos);
  }
}
