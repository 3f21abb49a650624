// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/conversions.hpp"

#include <optional>
#include <utility>

#include "polydom/lp.hpp"

namespace polydom {

namespace {

// The input's constraints with strict relations relaxed to non-strict.
// Suprema over the topological closure coincide with the tightest <= bounds
// of the original set, and the LP solver only accepts non-strict rows.
ConstraintSystem closed_constraints(const Polyhedron& p) {
  ConstraintSystem out(p.space_dimension());
  for (const Constraint& c : p.minimized_constraints())
    out.insert(c.is_strict() ? Constraint(c.expression(), RelKind::nonstrict)
                             : c);
  return out;
}

// Least upper bound of e over the feasible set; nullopt when unbounded.
// Pre: the problem is satisfiable.
std::optional<Rational> direction_sup(LpProblem& lp,
                                      const LinearExpression& e) {
  lp.set_objective_function(e);
  if (lp.solve() == LpStatus::optimized) return lp.optimal_value();
  return std::nullopt;
}

// e <= num/den rendered as the integral row num - den*e >= 0.
Constraint upper_bound_constraint(const LinearExpression& e,
                                  const Rational& bound) {
  LinearExpression le = LinearExpression::from_terms({}, bound.num());
  le += (-bound.den()) * e;
  return Constraint(std::move(le), RelKind::nonstrict);
}

// Runs `tighten` over every carrier direction the target shape can bound.
template <typename Shape, typename Directions>
Shape tightest_shape(const Polyhedron& p, Directions&& directions) {
  const dim_t n = p.space_dimension();
  Shape s(n);
  LpProblem lp(n, closed_constraints(p), LinearExpression(),
               OptimizationMode::maximize);
  directions(n, [&](const LinearExpression& e) {
    if (std::optional<Rational> b = direction_sup(lp, e))
      s.add_constraint(upper_bound_constraint(e, *b));
  });
  return s;
}

}  // namespace

BdShape<> to_bds(const Polyhedron& p, ComplexityClass cc) {
  const dim_t n = p.space_dimension();
  if (p.is_empty()) return BdShape<>::empty(n);
  if (cc == ComplexityClass::polynomial)
    return BdShape<>(closed_constraints(p), ShapePolicy::over_approximate);
  return tightest_shape<BdShape<>>(p, [](dim_t dim, auto&& tighten) {
    for (dim_t j = 0; j < dim; ++j) {
      const LinearExpression xj{Variable(j)};
      tighten(xj);
      tighten(-xj);
      for (dim_t i = 0; i < dim; ++i)
        if (i != j) tighten(xj - LinearExpression(Variable(i)));
    }
  });
}

OctShape<> to_oct(const Polyhedron& p, ComplexityClass cc) {
  const dim_t n = p.space_dimension();
  if (p.is_empty()) return OctShape<>::empty(n);
  if (cc == ComplexityClass::polynomial)
    return OctShape<>(closed_constraints(p), ShapePolicy::over_approximate);
  return tightest_shape<OctShape<>>(p, [](dim_t dim, auto&& tighten) {
    for (dim_t j = 0; j < dim; ++j) {
      const LinearExpression xj{Variable(j)};
      tighten(xj);
      tighten(-xj);
      for (dim_t i = 0; i < j; ++i) {
        const LinearExpression xi{Variable(i)};
        tighten(xi + xj);
        tighten(xi - xj);
        tighten(-xi + xj);
        tighten(-xi - xj);
      }
    }
  });
}

Polyhedron to_polyhedron(const BdShape<>& s) {
  return Polyhedron(s.constraints());
}

Polyhedron to_polyhedron(const OctShape<>& s) {
  return Polyhedron(s.constraints());
}

Polyhedron to_polyhedron(const Grid& g) {
  const dim_t n = g.space_dimension();
  if (g.is_empty()) return Polyhedron::empty(n);
  ConstraintSystem cs(n);
  for (const Congruence& cg : g.minimized_congruences())
    if (cg.is_equality()) cs.insert(Constraint(cg.expression(), RelKind::equal));
  return Polyhedron(cs);
}

Grid to_grid(const Polyhedron& p) {
  const dim_t n = p.space_dimension();
  if (p.is_empty()) return Grid::empty(n);
  CongruenceSystem cs(n);
  for (const Constraint& c : p.minimized_constraints())
    if (c.is_equality()) cs.insert(Congruence::equality(c.expression()));
  return Grid(cs);
}

Powerset<Polyhedron> embed(const Polyhedron& p) {
  return Powerset<Polyhedron>(p);
}

Polyhedron extract(const Powerset<Polyhedron>& ps) {
  if (ps.is_bottom()) return Polyhedron::empty(ps.space_dimension());
  auto it = ps.begin();
  Polyhedron out = *it;
  for (++it; it != ps.end(); ++it) out.upper_bound_assign(*it);
  return out;
}

}  // namespace polydom
