// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Cross-domain conversions. Every operation returns a sound approximation:
// the result's point set contains the input's. The complexity class chooses
// the algorithm, not the contract:
//  - polynomial: import the directly representable constraints and let the
//    target domain's closure tighten them — cheap, possibly coarse;
//  - simplex: optimize every carrier direction of the target domain with the
//    exact LP solver, yielding the tightest shape containing the input;
//  - any: no algorithmic bound requested, so the most precise route is used.
//
// Grid conversions go through the affine hull only: a grid exports its
// equalities, a polyhedron imports its equalities as modulus-0 congruences.
// The proper congruences (lattice structure) have no counterpart on the
// polyhedral side and are deliberately relaxed.

#pragma once

#include "polydom/bd_shape.hpp"
#include "polydom/grid.hpp"
#include "polydom/oct_shape.hpp"
#include "polydom/polyhedron.hpp"
#include "polydom/powerset.hpp"

namespace polydom {

enum class ComplexityClass { polynomial, simplex, any };

// Tightest (simplex/any) or closure-of-imported (polynomial) shape of p.
BdShape<> to_bds(const Polyhedron& p, ComplexityClass cc);
OctShape<> to_oct(const Polyhedron& p, ComplexityClass cc);

// Exact: shapes are polyhedra.
Polyhedron to_polyhedron(const BdShape<>& s);
Polyhedron to_polyhedron(const OctShape<>& s);

// Affine hull of the grid (its equalities; proper congruences relaxed).
Polyhedron to_polyhedron(const Grid& g);

// Affine hull of the polyhedron as a grid (equalities become modulus-0
// congruences; inequalities are relaxed).
Grid to_grid(const Polyhedron& p);

// Powerset embedding and its left inverse (collapse by convex hull).
Powerset<Polyhedron> embed(const Polyhedron& p);
Polyhedron extract(const Powerset<Polyhedron>& ps);

}  // namespace polydom
