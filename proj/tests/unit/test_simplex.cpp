#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "dapp/simplex.hpp"

using namespace dapp;
using namespace dapp::testing;
using Sense = LinearProgram::Sense;

TEST_CASE("one variable, one datacenter") {
  LinearProgram lp;
  const int y = lp.add_variable(544);
  lp.add_row({{y, 1}}, Sense::EQ, 1);
  lp.add_row({{y, 17}}, Sense::LE, 20);
  const LpResult r = simplex_solve(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(544));
  CHECK(r.x[0] == doctest::Approx(1));
}

TEST_CASE("capacity forces an even split") {
  LinearProgram lp;
  const int a = lp.add_variable(100), b = lp.add_variable(100);
  lp.add_row({{a, 1}, {b, 1}}, Sense::EQ, 1);
  lp.add_row({{a, 10}}, Sense::LE, 5);
  lp.add_row({{b, 10}}, Sense::LE, 5);
  const LpResult r = simplex_solve(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(0.5));
  CHECK(r.x[1] == doctest::Approx(0.5));
  CHECK(r.objective == doctest::Approx(100));
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram inf;
  const int x = inf.add_variable(1);
  inf.add_row({{x, 1}}, Sense::GE, 3);
  inf.add_row({{x, 1}}, Sense::LE, 2);
  CHECK(simplex_solve(inf).status == LpStatus::Infeasible);

  LinearProgram unb;
  const int u = unb.add_variable(-1);
  const int v = unb.add_variable(0);
  unb.add_row({{u, 1}, {v, -1}}, Sense::LE, 1);
  CHECK(simplex_solve(unb).status == LpStatus::Unbounded);

  LinearProgram boxed;
  const int w = boxed.add_variable(-1, 0, 4);
  boxed.add_row({{w, 1}}, Sense::LE, 10);
  const LpResult r = simplex_solve(boxed);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-4));
}

TEST_CASE("bounds and senses") {
  LinearProgram lp;
  const int a = lp.add_variable(2, 1, 3);
  const int b = lp.add_variable(-1, -2, 2);
  lp.add_row({{a, 1}, {b, 1}}, Sense::GE, 2);
  lp.add_row({{a, 1}, {b, -1}}, Sense::EQ, 0.5);
  const LpResult r = simplex_solve(lp);
  const VertexOptimum o = enumerate_vertices(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(o.feasible);
  CHECK(r.objective == doctest::Approx(o.objective));
}

TEST_CASE("warm start at upper bounds gives the same optimum") {
  LinearProgram lp;
  const int a = lp.add_variable(3, 0, 2), b = lp.add_variable(1), c = lp.add_variable(2, 0, 1);
  lp.add_row({{a, 1}, {b, 1}, {c, 1}}, Sense::EQ, 2);
  lp.add_row({{b, 1}}, Sense::LE, 1.5);
  SimplexOptions warm;
  warm.startAtUpper = {true, false, true};
  const LpResult cold = simplex_solve(lp), hot = simplex_solve(lp, warm);
  REQUIRE(cold.status == LpStatus::Optimal);
  REQUIRE(hot.status == LpStatus::Optimal);
  CHECK(cold.objective == doctest::Approx(hot.objective));
}

TEST_CASE("property: random bounded programs agree with vertex enumeration") {
  std::mt19937_64 rng(2024);
  auto ui = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp;
    const int n = ui(1, 4), m = ui(1, 3);
    for (int j = 0; j < n; ++j) {
      const double lo = ui(0, 2) == 0 ? -ui(0, 3) : 0;
      const double hi = ui(0, 1) == 0 ? kInf : lo + ui(1, 5);
      // Non-negative costs keep every instance bounded below when an upper
      // bound is missing.
      lp.add_variable(std::isinf(hi) ? ui(0, 9) : ui(-9, 9), lo, hi);
    }
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int j = 0; j < n; ++j) {
        if (ui(0, 2) > 0) row.emplace_back(j, ui(-4, 6));
      }
      if (row.empty()) row.emplace_back(0, 1);
      lp.add_row(row, static_cast<Sense>(ui(0, 2)), ui(-3, 12));
    }
    const LpResult r = simplex_solve(lp);
    const VertexOptimum o = enumerate_vertices(lp);
    CAPTURE(trial);
    if (!o.feasible) {
      CHECK(r.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(close_rel(r.objective, o.objective));
    ++optimal;
  }
  CHECK(optimal > 100);
}

TEST_CASE("degenerate program terminates") {
  // Many ties in the ratio test.
  LinearProgram lp;
  std::vector<int> v;
  for (int j = 0; j < 6; ++j) v.push_back(lp.add_variable(-1 - (j % 2)));
  for (int i = 0; i < 6; ++i) {
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < 6; ++j) row.emplace_back(v[static_cast<std::size_t>(j)], (i + j) % 3 == 0 ? 1 : 0.5);
    lp.add_row(row, Sense::LE, 0);
  }
  const LpResult r = simplex_solve(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0));
}
