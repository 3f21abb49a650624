#include "polydom/lp.hpp"

#include <chrono>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "polydom/core.hpp"
#include "polydom/linear_forms.hpp"
#include "polydom/polyhedron.hpp"

using namespace polydom;

namespace {

const Variable x(0), y(1);

ConstraintSystem make_cs(std::initializer_list<Constraint> cs, dim_t dim) {
  ConstraintSystem s(dim);
  for (const Constraint& c : cs) s.insert(c);
  return s;
}

// The region with vertices (4,1), (1,4) receding along (1,2) and (2,1).
ConstraintSystem wedge_cs() {
  return make_cs({x + y >= 5, x - 2 * y <= 2, y - 2 * x <= 2}, 2);
}

// Integer dot product of an expression with a ray direction.
Coefficient growth_along(const LinearExpression& e, const Generator& r) {
  Coefficient acc(0);
  for (dim_t d = 0; d < r.space_dimension(); ++d)
    acc += e.coefficient(Variable(d)) * r.coefficient(Variable(d));
  return acc;
}

Constraint widened_to(const Constraint& c, dim_t dim) {
  LinearExpression e = c.expression();
  e.extend_to(dim);
  return Constraint(std::move(e), c.kind());
}

bool feasible_at(const ConstraintSystem& cs, const Generator& g) {
  for (const Constraint& c : cs)
    if (satisfies(g, widened_to(c, g.space_dimension())) ==
        SatResult::violates)
      return false;
  return true;
}

bool recession_direction(const ConstraintSystem& cs, const Generator& r) {
  for (const Constraint& c : cs) {
    SatResult s = satisfies(r, widened_to(c, r.space_dimension()));
    if (c.is_equality() ? s != SatResult::saturates : s == SatResult::violates)
      return false;
  }
  return true;
}

Constraint random_constraint(std::mt19937& rng, dim_t dim, bool allow_eq) {
  std::uniform_int_distribution<long> coef(-4, 4), inhom(-8, 8);
  std::uniform_int_distribution<int> coin(0, 7);
  std::vector<std::pair<dim_t, Coefficient>> terms;
  bool nonzero = false;
  for (dim_t d = 0; d < dim; ++d) {
    long c = coef(rng);
    if (c != 0) nonzero = true;
    terms.emplace_back(d, Coefficient(c));
  }
  if (!nonzero) terms[0].second = Coefficient(1);
  LinearExpression e =
      LinearExpression::from_terms(terms, Coefficient(inhom(rng)));
  return Constraint(e, allow_eq && coin(rng) == 0 ? RelKind::equal
                                                  : RelKind::nonstrict);
}

LinearExpression random_objective(std::mt19937& rng, dim_t dim) {
  std::uniform_int_distribution<long> coef(-5, 5);
  std::vector<std::pair<dim_t, Coefficient>> terms;
  for (dim_t d = 0; d < dim; ++d) terms.emplace_back(d, Coefficient(coef(rng)));
  return LinearExpression::from_terms(terms, Coefficient(coef(rng)));
}

}  // namespace

TEST_CASE("unconstrained problems optimize constants and nothing else") {
  LpProblem zero_dim(0);
  CHECK(zero_dim.is_satisfiable());
  zero_dim.set_objective_function(LinearExpression(Coefficient(7)));
  CHECK(zero_dim.solve() == LpStatus::optimized);
  CHECK(zero_dim.optimal_value() == Rational(7));
  CHECK(zero_dim.optimizing_point().space_dimension() == 0);

  LpProblem plane(2);
  CHECK(plane.is_satisfiable());
  CHECK(plane.solve() == LpStatus::optimized);  // zero objective
  CHECK(plane.optimal_value() == Rational(0));
  plane.set_objective_function(x);
  CHECK(plane.solve() == LpStatus::unbounded);
  Generator r = plane.unbounded_ray();
  CHECK(growth_along(LinearExpression(x), r).sign() > 0);
}

TEST_CASE("the wedge bounds x from below only") {
  LpProblem lp(2, wedge_cs(), LinearExpression(x), OptimizationMode::maximize);
  CHECK(lp.is_satisfiable());
  const std::size_t warmed_up = lp.phase1_pivot_count();
  CHECK(warmed_up > 0);  // the origin violates x + y >= 5

  CHECK(lp.solve() == LpStatus::unbounded);
  Generator r = lp.unbounded_ray();
  CHECK(recession_direction(wedge_cs(), r));
  CHECK(growth_along(LinearExpression(x), r).sign() > 0);

  lp.set_optimization_mode(OptimizationMode::minimize);
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(1));
  Generator p = lp.optimizing_point();
  CHECK(p.coordinate(x) == Rational(1));
  CHECK(p.coordinate(y) == Rational(4));

  // Same region is symmetric under swapping the axes.
  lp.set_objective_function(y);
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(1));
  CHECK(lp.optimizing_point().coordinate(x) == Rational(4));

  // A constant objective is trivially attained anywhere feasible.
  lp.set_objective_function(LinearExpression());
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(0));

  // None of the re-solves above repeated the feasibility phase.
  CHECK(lp.phase1_pivot_count() == warmed_up);
}

TEST_CASE("incremental tightening collapses an interval without restarting") {
  LpProblem lp(1);
  lp.add_constraint(LinearExpression(Variable(0)) >= 0);
  CHECK(lp.is_satisfiable());
  const std::size_t phase1 = lp.phase1_pivot_count();
  lp.add_constraint(LinearExpression(Variable(0)) <= 5);
  CHECK(lp.is_satisfiable());
  lp.add_constraint(LinearExpression(Variable(0)) >= 6);
  CHECK(!lp.is_satisfiable());
  // Once unsatisfiable, further additions cannot revive the system.
  lp.add_constraint(LinearExpression(Variable(0)) <= 100);
  CHECK(!lp.is_satisfiable());
  CHECK(lp.phase1_pivot_count() == phase1);
}

TEST_CASE("mode flip reaches the other end of a box") {
  ConstraintSystem box = make_cs({x >= 0, x <= 5}, 1);
  LpProblem lp(1, box, LinearExpression(x), OptimizationMode::maximize);
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(5));
  lp.set_optimization_mode(OptimizationMode::minimize);
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(0));
}

TEST_CASE("an objective on a different constrained dimension stays bounded") {
  ConstraintSystem cs = make_cs({x >= 0, x <= 5, y >= 0, y <= 3}, 2);
  LpProblem lp(2, cs, LinearExpression(y), OptimizationMode::maximize);
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(3));
}

TEST_CASE("equalities pin the optimum to the unique solution") {
  ConstraintSystem cs = make_cs(
      {x + y == LinearExpression(Coefficient(5)), x - y == LinearExpression(Coefficient(1))}, 2);
  LpProblem lp(2, cs, LinearExpression(x), OptimizationMode::maximize);
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(3));
  Generator p = lp.optimizing_point();
  CHECK(p.coordinate(x) == Rational(3));
  CHECK(p.coordinate(y) == Rational(2));

  Coefficient num, den;
  lp.set_objective_function(x + 2 * y);
  lp.evaluate_objective_function(p, num, den);
  CHECK(num == Coefficient(7));
  CHECK(den == Coefficient(1));
}

TEST_CASE("objective evaluation at generators is exact") {
  LpProblem lp(2);
  lp.set_objective_function(6 * LinearExpression(x) + 6 * y);
  Generator half_third =
      Generator::point_from_rationals({Rational(1, 2), Rational(1, 3)});
  Coefficient num, den;
  lp.evaluate_objective_function(half_third, num, den);
  CHECK(num == Coefficient(5));
  CHECK(den == Coefficient(1));

  lp.set_objective_function(x);
  lp.evaluate_objective_function(half_third, num, den);
  CHECK(num == Coefficient(1));
  CHECK(den == Coefficient(2));

  // Directions carry no objective value.
  try {
    lp.evaluate_objective_function(Generator::ray(x + y), num, den);
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("a classically degenerate program terminates at its optimum") {
  // Scaled to integer data, this instance makes eager pivot rules loop
  // forever on ties; the least-index rule must walk out of the degenerate
  // corner and stop at the exact minimum.
  const Variable x1(0), x2(1), x3(2), x4(3);
  ConstraintSystem cs = make_cs(
      {
          25 * LinearExpression(x1) - 6000 * x2 - 4 * x3 + 900 * x4 <= 0,
          50 * LinearExpression(x1) - 9000 * x2 - 2 * x3 + 300 * x4 <= 0,
          LinearExpression(x3) <= 1,
          LinearExpression(x1) >= 0,
          LinearExpression(x2) >= 0,
          LinearExpression(x3) >= 0,
          LinearExpression(x4) >= 0,
      },
      4);
  LinearExpression obj =
      -75 * LinearExpression(x1) + 15000 * x2 - 2 * x3 + 600 * x4;
  LpProblem lp(4, cs, obj, OptimizationMode::minimize);
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(-5));
  CHECK(feasible_at(cs, lp.optimizing_point()));

  Polyhedron oracle(cs);
  Extremum ext = oracle.minimize(obj);
  CHECK(ext.bounded);
  CHECK(ext.value == lp.optimal_value());

  // A cone of redundant facets through the origin: every basis there is
  // degenerate, yet the walk still leaves.
  ConstraintSystem cone = make_cs({x >= 0, y >= 0, x + y >= 0, 2 * x + y >= 0,
                                   x + 2 * y >= 0, 3 * x + y >= 0,
                                   x + 3 * y >= 0},
                                  2);
  LpProblem tip(2, cone, -LinearExpression(x) - y, OptimizationMode::maximize);
  CHECK(tip.solve() == LpStatus::optimized);
  CHECK(tip.optimal_value() == Rational(0));
}

TEST_CASE("random bounded programs match the vertex-enumeration optimum") {
  std::mt19937 rng(24601);
  std::uniform_int_distribution<dim_t> dims(1, 3);
  std::uniform_int_distribution<std::size_t> how_many(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    dim_t dim = dims(rng);
    ConstraintSystem cs(dim);
    for (dim_t d = 0; d < dim; ++d) {
      cs.insert(LinearExpression(Variable(d)) >= -10);
      cs.insert(LinearExpression(Variable(d)) <= 10);
    }
    std::size_t extra = how_many(rng);
    for (std::size_t i = 0; i < extra; ++i)
      cs.insert(random_constraint(rng, dim, true));
    LinearExpression obj = random_objective(rng, dim);

    Polyhedron oracle(cs);
    LpProblem lp(dim, cs, obj, OptimizationMode::maximize);
    if (oracle.is_empty()) {
      CHECK(!lp.is_satisfiable());
      CHECK(lp.solve() == LpStatus::unfeasible);
      continue;
    }
    Extremum ext = oracle.maximize(obj);
    REQUIRE(ext.bounded);
    REQUIRE(lp.solve() == LpStatus::optimized);
    CHECK(lp.optimal_value() == ext.value);
    Generator p = lp.optimizing_point();
    CHECK(feasible_at(cs, p));
    Coefficient num, den;
    lp.evaluate_objective_function(p, num, den);
    CHECK(Rational(num, den) == lp.optimal_value());

    lp.set_optimization_mode(OptimizationMode::minimize);
    Extremum lo = oracle.minimize(obj);
    REQUIRE(lp.solve() == LpStatus::optimized);
    CHECK(lp.optimal_value() == lo.value);
  }
}

TEST_CASE("unbounded verdicts carry a certified recession direction") {
  std::mt19937 rng(5882);
  std::uniform_int_distribution<dim_t> dims(1, 3);
  std::uniform_int_distribution<std::size_t> how_many(1, 6);
  int unbounded_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    dim_t dim = dims(rng);
    ConstraintSystem cs(dim);
    std::size_t count = how_many(rng);
    for (std::size_t i = 0; i < count; ++i)
      cs.insert(random_constraint(rng, dim, false));
    LinearExpression obj = random_objective(rng, dim);

    Polyhedron oracle(cs);
    LpProblem lp(dim, cs, obj, OptimizationMode::maximize);
    if (oracle.is_empty()) {
      CHECK(!lp.is_satisfiable());
      continue;
    }
    Extremum ext = oracle.maximize(obj);
    LpStatus st = lp.solve();
    if (ext.bounded) {
      REQUIRE(st == LpStatus::optimized);
      CHECK(lp.optimal_value() == ext.value);
    } else {
      REQUIRE(st == LpStatus::unbounded);
      ++unbounded_seen;
      Generator r = lp.unbounded_ray();
      CHECK(recession_direction(cs, r));
      CHECK(growth_along(obj, r).sign() > 0);
    }
  }
  CHECK(unbounded_seen > 5);  // the sample genuinely exercises the branch
}

TEST_CASE("prefix satisfiability matches from-scratch re-solving") {
  std::mt19937 rng(31415);
  std::uniform_int_distribution<dim_t> dims(1, 3);
  for (int trial = 0; trial < 30; ++trial) {
    dim_t dim = dims(rng);
    std::vector<Constraint> all;
    for (int i = 0; i < 8; ++i) all.push_back(random_constraint(rng, dim, true));

    LpProblem inc(dim);
    bool counter_frozen = false;
    std::size_t frozen_value = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
      inc.add_constraint(all[k]);
      bool inc_sat = inc.is_satisfiable();

      ConstraintSystem prefix(dim);
      for (std::size_t i = 0; i <= k; ++i) prefix.insert(all[i]);
      LpProblem fresh(dim, prefix, LinearExpression(), OptimizationMode::maximize);
      CHECK(inc_sat == fresh.is_satisfiable());
      CHECK(inc_sat == !Polyhedron(prefix).is_empty());

      // After the first check the incremental solver only patches its basis;
      // the feasibility phase never runs again for this problem.
      if (!counter_frozen) {
        counter_frozen = true;
        frozen_value = inc.phase1_pivot_count();
      } else {
        CHECK(inc.phase1_pivot_count() == frozen_value);
      }
    }
  }
}

TEST_CASE("strictness and dimension violations are rejected up front") {
  LpProblem lp(2);
  try {
    lp.add_constraint(x + y > 0);
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.kind() == ErrorKind::topology_mismatch);
  }
  try {
    lp.add_constraint(LinearExpression(Variable(5)) >= 0);
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
  try {
    lp.set_objective_function(LinearExpression(Variable(3)));
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }

  lp.set_objective_function(x);
  CHECK(lp.solve() == LpStatus::unbounded);
  try {
    lp.optimizing_point();
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
  lp.add_constraint(x <= 0);
  lp.add_constraint(x >= 0);
  CHECK(lp.solve() == LpStatus::optimized);
  try {
    lp.unbounded_ray();
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("deadline abandonment leaves the problem reusable") {
  const dim_t n = 8;
  ConstraintSystem cs(n);
  for (dim_t d = 0; d < n; ++d) {
    cs.insert(LinearExpression(Variable(d)) >= 1);
    cs.insert(LinearExpression(Variable(d)) <= 2);
  }
  LinearExpression sum;
  for (dim_t d = 0; d < n; ++d) sum += LinearExpression(Variable(d));
  LpProblem lp(n, cs, sum, OptimizationMode::maximize);
  {
    BudgetContext ctx =
        BudgetContext::with_deadline(std::chrono::nanoseconds(0));
    BudgetScope scope(ctx);
    try {
      lp.solve();
      CHECK(false);
    } catch (const DomainError& e) {
      CHECK(e.kind() == ErrorKind::abandoned);
    }
  }
  CHECK(lp.solve() == LpStatus::optimized);
  CHECK(lp.optimal_value() == Rational(16));
}

TEST_CASE("checked coefficients overflow loudly during pivoting") {
  const std::int64_t big = std::int64_t{1} << 62;
  ConstraintSystem cs(1);
  cs.insert(Constraint(LinearExpression::from_terms(
                           {{0, Coefficient::checked(1)}},
                           Coefficient::checked(-big)),
                       RelKind::nonstrict));  // x >= big
  cs.insert(Constraint(LinearExpression::from_terms(
                           {{0, Coefficient::checked(-1)}},
                           Coefficient::checked(big) + Coefficient::checked(1)),
                       RelKind::nonstrict));  // x <= big + 1
  LpProblem lp(1, cs, LinearExpression(Variable(0)),
               OptimizationMode::maximize);
  try {
    lp.is_satisfiable();
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.kind() == ErrorKind::overflow);
  }
}

TEST_CASE("statuses print for tooling") {
  std::ostringstream os;
  os << LpStatus::unfeasible << ' ' << LpStatus::unbounded << ' '
     << LpStatus::optimized;
  CHECK(os.str() == "unfeasible unbounded optimized");
}
