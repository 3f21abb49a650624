// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/conversions.hpp"

#include <random>
#include <vector>

#include "doctest.h"

using namespace polydom;

namespace {

const Variable x(0), y(1), z(2);

Polyhedron from_constraints(std::initializer_list<Constraint> cs,
                            dim_t dim = 0) {
  for (const Constraint& c : cs) dim = std::max(dim, c.space_dimension());
  ConstraintSystem sys(dim);
  for (const Constraint& c : cs) sys.insert(c);
  return Polyhedron(sys);
}

// Unbounded fan: two vertices, two recession rays.
Polyhedron fan() {
  return from_constraints({x + y >= 5, x - 2 * y <= 2, y - 2 * x <= 2});
}

Polyhedron unit_square() {
  return from_constraints({x >= 0, x <= 1, y >= 0, y <= 1});
}

Polyhedron diamond() {
  return from_constraints({x + y <= 1, x - y <= 1, y - x <= 1, x + y >= -1});
}

BdShape<> bd_of(std::initializer_list<Constraint> cs, dim_t dim) {
  ConstraintSystem sys(dim);
  for (const Constraint& c : cs) sys.insert(c);
  return BdShape<>(sys, ShapePolicy::reject);
}

OctShape<> oct_of(std::initializer_list<Constraint> cs, dim_t dim) {
  ConstraintSystem sys(dim);
  for (const Constraint& c : cs) sys.insert(c);
  return OctShape<>(sys, ShapePolicy::reject);
}

Polyhedron random_poly(std::mt19937& rng, dim_t dim) {
  std::uniform_int_distribution<long> coeff(-4, 4), inhom(-6, 6);
  ConstraintSystem cs(dim);
  const int rows = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int r = 0; r < rows; ++r) {
    LinearExpression e;
    for (dim_t d = 0; d < dim; ++d)
      e += coeff(rng) * LinearExpression(Variable(d));
    e += LinearExpression::from_terms({}, Coefficient(inhom(rng)));
    cs.insert(Constraint(std::move(e), RelKind::nonstrict));
  }
  return Polyhedron(cs);
}

}  // namespace

TEST_CASE("tightest difference shape of the fan keeps only what is sound") {
  const Polyhedron p = fan();
  const BdShape<> s = to_bds(p, ComplexityClass::simplex);
  // Both variables are bounded below at 1; every other direction recedes
  // along the rays (2,1) and (1,2), so no difference bound is sound.
  CHECK(s.equals(bd_of({x >= 1, y >= 1}, 2)));
  CHECK(to_polyhedron(s).contains(p));
  // The fan's member (4,1)+(2,1) = (6,2) must stay inside; a difference
  // bound x - y <= 3 would have cut it off.
  CHECK(to_polyhedron(s).contains(from_constraints({x >= 6, x <= 6, y >= 2,
                                                    y <= 2})));

  // The fan has no directly representable row, so the polynomial class
  // yields the universe — coarser than the simplex result, never finer.
  const BdShape<> loose = to_bds(p, ComplexityClass::polynomial);
  CHECK(loose.is_universe());
  CHECK(loose.contains(s));
}

TEST_CASE("trivial inputs convert to trivial shapes in every class") {
  for (ComplexityClass cc : {ComplexityClass::polynomial,
                             ComplexityClass::simplex, ComplexityClass::any}) {
    CHECK(to_bds(Polyhedron::universe(3), cc).is_universe());
    CHECK(to_bds(Polyhedron::empty(3), cc).is_empty());
    CHECK(to_oct(Polyhedron::universe(2), cc).is_universe());
    CHECK(to_oct(Polyhedron::empty(2), cc).is_empty());
  }
  CHECK(to_polyhedron(BdShape<>::universe(2)).is_universe());
  CHECK(to_polyhedron(BdShape<>::empty(2)).is_empty());
  CHECK(to_polyhedron(OctShape<>::empty(1)).is_empty());
}

TEST_CASE("shapes round-trip through polyhedra unchanged") {
  const BdShape<> b = bd_of({x - y <= 3, y - x <= 3, x >= 1, y <= 7}, 2);
  CHECK(to_bds(to_polyhedron(b), ComplexityClass::simplex).equals(b));

  const OctShape<> o =
      oct_of({x + y <= 4, x - y <= 1, x + y >= 0, x <= 2}, 2);
  CHECK(to_oct(to_polyhedron(o), ComplexityClass::simplex).equals(o));

  // The diamond is itself an octagon: oct conversion is exact, while the
  // best difference shape properly contains it.
  const Polyhedron d = diamond();
  CHECK(to_polyhedron(to_oct(d, ComplexityClass::simplex)).equals(d));
  const Polyhedron bd_hull = to_polyhedron(to_bds(d, ComplexityClass::simplex));
  CHECK(bd_hull.contains(d));
  CHECK(!bd_hull.equals(d));

  // Galois-style contraction on a shape-representable input.
  const Polyhedron sq = unit_square();
  CHECK(to_polyhedron(to_bds(sq, ComplexityClass::simplex)).equals(sq));
  CHECK(to_polyhedron(to_bds(fan(), ComplexityClass::simplex))
            .strictly_contains(fan()));
}

TEST_CASE("random conversions are sound and respect the class order") {
  std::mt19937 rng(1847);
  int nonempty = 0;
  for (int round = 0; round < 60; ++round) {
    const dim_t dim = 1 + static_cast<dim_t>(round % 3);
    const Polyhedron p = random_poly(rng, dim);
    const BdShape<> bd_tight = to_bds(p, ComplexityClass::simplex);
    const BdShape<> bd_loose = to_bds(p, ComplexityClass::polynomial);
    const OctShape<> oct_tight = to_oct(p, ComplexityClass::simplex);
    const OctShape<> oct_loose = to_oct(p, ComplexityClass::polynomial);

    CHECK(to_polyhedron(bd_tight).contains(p));
    CHECK(to_polyhedron(oct_tight).contains(p));
    CHECK(bd_loose.contains(bd_tight));
    CHECK(oct_loose.contains(oct_tight));
    // Octagons refine difference shapes on the same input.
    CHECK(to_polyhedron(bd_tight).contains(to_polyhedron(oct_tight)));
    if (!p.is_empty()) ++nonempty;

    // `any` places no algorithmic bound and matches the precise route.
    CHECK(to_bds(p, ComplexityClass::any).equals(bd_tight));
    CHECK(to_oct(p, ComplexityClass::any).equals(oct_tight));
  }
  CHECK(nonempty > 20);
}

TEST_CASE("grid conversions exchange affine hulls") {
  // A full-rank lattice relaxes to the whole space.
  Grid fig(CongruenceSystem(2));
  fig.add_congruence(Congruence::make(LinearExpression(x), Coefficient(0),
                                      Coefficient(2)));
  fig.add_congruence(Congruence::make(
      LinearExpression(x) + 2 * LinearExpression(y), Coefficient(2),
      Coefficient(4)));
  CHECK(to_polyhedron(fig).is_universe());

  // Equalities survive in both directions.
  Grid flat(CongruenceSystem(2));
  flat.add_congruence(Congruence::equality(LinearExpression(x) -
                                           LinearExpression(y)));
  flat.add_congruence(Congruence::make(LinearExpression(x), Coefficient(0),
                                       Coefficient(3)));
  const Polyhedron hull = to_polyhedron(flat);
  CHECK(hull.equals(from_constraints({Constraint(
      LinearExpression(x) - LinearExpression(y), RelKind::equal)}, 2)));

  const Polyhedron line =
      from_constraints({Constraint(LinearExpression(x) + LinearExpression(y) -
                                       LinearExpression::from_terms(
                                           {}, Coefficient(4)),
                                   RelKind::equal),
                        x >= 0});
  const Grid g = to_grid(line);
  CHECK(g.contains_point({Rational(1), Rational(3)}));
  CHECK(g.contains_point({Rational(-2), Rational(6)}));  // inequality relaxed
  CHECK(!g.contains_point({Rational(1), Rational(1)}));

  // Round trip reaches the affine hull, exactly for affine subspaces.
  CHECK(to_polyhedron(to_grid(line)).contains(line));
  const Polyhedron subspace = from_constraints(
      {Constraint(LinearExpression(x) - LinearExpression(y), RelKind::equal)},
      2);
  CHECK(to_polyhedron(to_grid(subspace)).equals(subspace));
  CHECK(to_polyhedron(to_grid(unit_square())).is_universe());

  CHECK(to_grid(Polyhedron::empty(2)).is_empty());
  CHECK(to_polyhedron(Grid::empty(2)).is_empty());
  CHECK(to_grid(Polyhedron::universe(2)).is_universe());
}

TEST_CASE("powerset embedding collapses back to the hull") {
  const Polyhedron sq = unit_square();
  CHECK(extract(embed(sq)).equals(sq));
  CHECK(embed(Polyhedron::empty(2)).is_bottom());
  CHECK(extract(Powerset<Polyhedron>(2)).is_empty());
  CHECK(extract(Powerset<Polyhedron>(2)).space_dimension() == 2);

  Powerset<Polyhedron> ps = embed(from_constraints({x >= 0, x <= 1}, 1));
  ps.add_disjunct(from_constraints({x >= 5, x <= 6}, 1));
  CHECK(extract(ps).equals(from_constraints({x >= 0, x <= 6}, 1)));
}
