// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Convex polyhedra (topologically closed or NNC) kept as a double
// description: a constraint system and a generator system linked by a
// saturation bit matrix, with lazy conversion in either direction. Strict
// inequalities are carried in an internal epsilon dimension that never leaks
// through the public interface.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polydom/core.hpp"
#include "polydom/linear_forms.hpp"

namespace polydom {

enum class Topology { closed, nnc };

// Result of comparing a polyhedron with a single constraint.
struct ConstraintRelation {
  bool is_included = false;      // every point satisfies the constraint
  bool saturates = false;        // the polyhedron lies on the hyperplane
  bool is_disjoint = false;      // no point satisfies the constraint
  bool strictly_intersects = false;
};

// Exact extremum of a linear expression over a polyhedron.
struct Extremum {
  bool bounded = false;
  Rational value;      // meaningful when bounded
  bool attained = false;  // false when only approached (NNC supremum)
};

namespace dd {

// Homogeneous internal row; `line` marks lines (generator side) and
// equalities (constraint side).
struct Row {
  std::vector<Coefficient> a;
  bool line = false;
};

// Dynamic bit row of a saturation matrix.
class BitRow {
 public:
  void resize(std::size_t n);
  std::size_t size() const { return n_; }
  bool test(std::size_t i) const;
  void set(std::size_t i);
  void append(bool b);
  std::size_t count() const;
  static BitRow ones(std::size_t n);
  friend BitRow operator&(const BitRow& a, const BitRow& b);
  bool is_subset_of(const BitRow& b) const;
  friend bool operator==(const BitRow& a, const BitRow& b);

 private:
  std::vector<std::uint64_t> w_;
  std::size_t n_ = 0;
};

using Rows = std::vector<Row>;
using SatMatrix = std::vector<BitRow>;

// Folds source rows [start, end) into the double description (dest, sat).
// dest starts as a full-space basis (or a previous conversion result); sat
// has one row per dest row with bits for source columns [0, start).
// With detect_empty (constraints-to-generators direction only) returns false
// as soon as no row can contribute a point; dest/sat are then unspecified.
bool conversion(const Rows& source, std::size_t start, Rows& dest,
                SatMatrix& sat, bool nnc, bool detect_empty);

// Removes redundant source rows given a complete dest description; sat is
// dest-row-major over source columns and is compacted in step.
void simplify(Rows& source, Rows& dest, SatMatrix& sat);

}  // namespace dd

class Polyhedron {
 public:
  // Universe (full space) of the given dimension and topology.
  explicit Polyhedron(dim_t dim, Topology t = Topology::closed);
  static Polyhedron universe(dim_t dim, Topology t = Topology::closed);
  static Polyhedron empty(dim_t dim, Topology t = Topology::closed);
  explicit Polyhedron(const ConstraintSystem& cs,
                      Topology t = Topology::closed);
  explicit Polyhedron(const GeneratorSystem& gs,
                      Topology t = Topology::closed);

  Topology topology() const { return topology_; }
  dim_t space_dimension() const { return dim_; }
  dim_t affine_dim() const;

  bool is_empty() const;
  bool is_universe() const;
  bool is_bounded() const;
  bool is_topologically_closed() const;
  bool contains(const Polyhedron& q) const;
  bool strictly_contains(const Polyhedron& q) const;
  bool is_disjoint_from(const Polyhedron& q) const;
  bool equals(const Polyhedron& q) const;
  friend bool operator==(const Polyhedron& p, const Polyhedron& q) {
    return p.equals(q);
  }

  ConstraintRelation relation_with(const Constraint& c) const;
  bool subsumes(const Generator& g) const;  // point in / ray recedes / line

  Extremum maximize(const LinearExpression& e) const;
  Extremum minimize(const LinearExpression& e) const;

  // Minimized descriptions in user vocabulary (no epsilon artifacts, no
  // redundant rows). The empty polyhedron reports the canonical
  // unsatisfiable constraint.
  ConstraintSystem minimized_constraints() const;
  GeneratorSystem minimized_generators() const;
  // Up-to-date but not necessarily minimized view.
  ConstraintSystem constraints() const;
  GeneratorSystem generators() const;

  void add_constraint(const Constraint& c);
  void add_constraints(const ConstraintSystem& cs);
  void add_generator(const Generator& g);
  void add_generators(const GeneratorSystem& gs);

  void intersection_assign(const Polyhedron& q);
  void upper_bound_assign(const Polyhedron& q);    // convex polyhedral hull
  void difference_assign(const Polyhedron& q);     // smallest hull of p \ q
  void time_elapse_assign(const Polyhedron& q);
  void topological_closure_assign();

  void affine_image(Variable v, const LinearExpression& e,
                    const Coefficient& denominator = Coefficient(1));
  void affine_preimage(Variable v, const LinearExpression& e,
                       const Coefficient& denominator = Coefficient(1));
  void generalized_affine_image(Variable v, RelKind rel,
                                const LinearExpression& e,
                                const Coefficient& denominator = Coefficient(1));

  void add_space_dimensions_and_embed(dim_t m);
  void add_space_dimensions_and_project(dim_t m);
  void remove_space_dimensions(const std::set<dim_t>& dims);
  void remove_higher_space_dimensions(dim_t new_dim);
  // Partial injective map old dim -> new dim; unmapped dimensions dropped.
  void map_space_dimensions(const std::vector<std::optional<dim_t>>& map,
                            dim_t new_dim);
  void concatenate_assign(const Polyhedron& q);
  void expand_space_dimension(Variable v, dim_t m);
  void fold_space_dimensions(const std::set<dim_t>& dims, Variable v);

  // Widenings: *this is the previous, smaller iterate p; q is the next
  // iterate with p ⊆ q; the result replaces *this and contains q.
  void widening_h79_assign(const Polyhedron& q, unsigned* tokens = nullptr);
  void widening_bhrz03_assign(const Polyhedron& q, unsigned* tokens = nullptr);
  // Widening followed by reinstating constraints of cs that q satisfies.
  void limited_h79_extrapolation_assign(const Polyhedron& q,
                                        const ConstraintSystem& cs,
                                        unsigned* tokens = nullptr);
  // Additionally bounded by an interval-widened bounding box.
  void bounded_h79_extrapolation_assign(const Polyhedron& q,
                                        const ConstraintSystem& cs,
                                        unsigned* tokens = nullptr);

  // Convergence measure used by the precise widening and by powersets:
  // (space_dim - affine_dim, number of minimized constraints), ordered
  // lexicographically; strictly decreasing along widening sequences.
  std::pair<dim_t, std::size_t> widening_certificate() const;

  // Diagnostic dump: status flags plus both internal systems.
  std::string ascii_dump() const;

 private:
  Topology topology_;
  dim_t dim_;
  // Double description state. `empty_` short-circuits everything else.
  mutable dd::Rows con_, gen_;
  mutable dd::SatMatrix sat_;       // gen-row-major over con columns
  mutable bool con_valid_ = false, gen_valid_ = false, sat_valid_ = false;
  mutable bool minimized_ = false;
  mutable bool empty_ = false, empty_known_ = false;

  dim_t h_dim() const { return dim_ + (topology_ == Topology::nnc ? 2 : 1); }
  bool is_nnc() const { return topology_ == Topology::nnc; }

  void init_universe_constraints();
  void set_empty() const;
  void ensure_generators() const;
  void ensure_constraints() const;
  void minimize() const;

  dd::Row row_from_constraint(const Constraint& c) const;
  Constraint constraint_from_row(const dd::Row& r) const;
  std::vector<dd::Row> rows_from_generator(const Generator& g) const;
  Generator generator_from_row(const dd::Row& r) const;
  bool row_is_scaffolding(const dd::Row& r) const;

  ConstraintSystem user_constraints_raw() const;
  GeneratorSystem user_generators_raw() const;
  static bool system_entails(const GeneratorSystem& gs, const Constraint& c);

  void check_binary_compat(const Polyhedron& q, const char* op) const;
  Polyhedron h79_result(const Polyhedron& q) const;
};

std::ostream& operator<<(std::ostream& os, const Polyhedron& p);

}  // namespace polydom
