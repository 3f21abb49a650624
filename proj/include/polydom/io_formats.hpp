// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Readers and writers for the cdd/lrs polyhedra exchange format and for the
// classic MPS linear-programming format.
//
// Polyhedra files ("*.ine" H-representation, "*.ext" V-representation) are a
// token stream: comment lines start with '*'; an optional representation
// line and an optional "linearity k i1 ... ik" line (1-based row indices)
// precede the block
//
//   begin
//    m n+1 integer|rational
//    <m rows of n+1 numbers, "p/q" or integer>
//   end
//
// An H row (b, a1..an) encodes b + a·x >= 0 (an equality when listed in
// linearity). A V row with leading 0 is a ray (a line when in linearity);
// a positive leading entry t denotes the point (a1/t, ..., an/t), so integer
// files can carry rational vertices — leading 1 is the plain-vertex special
// case. Directives after "end" are collected as warnings, not errors.
// The writer clears each row to coprime integers (positive common
// denominator), so writing is canonicalization and parse ∘ write is the
// identity on its own output.
//
// Parse failures throw DomainError(parse_error) carrying the 1-based line
// and column of the offending token.

#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "polydom/core.hpp"
#include "polydom/linear_forms.hpp"
#include "polydom/polyhedron.hpp"

namespace polydom {

enum class PolyRep { H, V };

struct PolyFile {
  PolyRep representation = PolyRep::H;
  bool rational = false;   // declared number type
  std::size_t cols = 0;    // entries per row (n + 1)
  std::vector<std::vector<Rational>> rows;
  std::set<std::size_t> linearity;  // 0-based row indices
  std::vector<std::string> warnings;

  dim_t space_dimension() const {
    return cols == 0 ? 0 : static_cast<dim_t>(cols - 1);
  }
  friend bool operator==(const PolyFile& a, const PolyFile& b) {
    return a.representation == b.representation && a.cols == b.cols &&
           a.rows == b.rows && a.linearity == b.linearity;
  }
};

PolyFile parse_poly_file(const std::string& text);
std::string write_poly_file(const PolyFile& f);

// Exact translations. V files with no rows denote the empty polyhedron.
// `mode` selects the coefficient arithmetic for everything built from the
// file (checked 64-bit signals overflow instead of growing). The system
// accessors expose the raw rows (pre: matching representation) for callers
// that feed a solver directly and never need the domain object.
ConstraintSystem to_constraint_system(
    const PolyFile& f, Coefficient::Mode mode = Coefficient::Mode::unbounded);
GeneratorSystem to_generator_system(
    const PolyFile& f, Coefficient::Mode mode = Coefficient::Mode::unbounded);
Polyhedron poly_to_domain(
    const PolyFile& f, Coefficient::Mode mode = Coefficient::Mode::unbounded);

// Minimized system of p in the requested representation. Strict inequalities
// cannot be written (the format is topologically closed) and raise
// topology_mismatch.
PolyFile domain_to_poly(const Polyhedron& p, PolyRep rep);

// MPS linear programs. Sections NAME, ROWS, COLUMNS, RHS are honored,
// RANGES and BOUNDS optionally; integer markers and integer bound kinds are
// rejected with parse_error. Values are exact: integer, fraction "p/q", or
// decimal/exponent literals converted to exact rationals.
//
// The translation is performed on parse: structural rows become constraints
// in declaration order (L: a·x <= rhs, G: a·x >= rhs, E: equality; RANGES
// split a row into its two sides), followed by one constraint per finite
// variable bound in column order. Columns default to 0 <= x < +infinity.
// The first N row is the objective; an RHS entry on it contributes the
// customary constant  objective(x) = c·x - rhs.
//
// Expressions carry integer coefficients, so a fractional objective is
// scaled: the exact objective value is  objective(x) / objective_denominator.
struct MpsProblem {
  std::string name;
  std::vector<std::string> column_names;  // dimension i <-> column_names[i]
  std::string objective_name;
  LinearExpression objective;
  Coefficient objective_denominator = Coefficient(1);
  ConstraintSystem constraints;
  std::size_t structural_rows = 0;  // constraints before the bound block
  std::vector<std::string> warnings;

  dim_t space_dimension() const {
    return static_cast<dim_t>(column_names.size());
  }
};

MpsProblem parse_mps(const std::string& text);

// Every coefficient of every row carried in the requested mode (switching to
// checked 64-bit overflows on values that do not fit).
ConstraintSystem with_coefficient_mode(const ConstraintSystem& cs,
                                       Coefficient::Mode mode);

}  // namespace polydom
