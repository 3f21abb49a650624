// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Rational grids: sets of the form L + q where L is a lattice generated by
// finitely many rational parameter vectors plus real lines, described dually
// by congruence systems (a·x ≡ b (mod f), with f = 0 for equalities). Both
// descriptions are kept and converted on demand by inverting a completed
// square matrix exactly; minimal forms are canonical, so two grids are equal
// iff their minimized descriptions coincide row for row.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polydom/core.hpp"
#include "polydom/linear_forms.hpp"

namespace polydom {

class Grid {
 public:
  // Universe (all of rational space) of the given dimension.
  explicit Grid(dim_t dim);
  static Grid universe(dim_t dim);
  static Grid empty(dim_t dim);
  explicit Grid(const CongruenceSystem& cgs);
  // A nonempty system must contain a grid point; a system with no rows
  // denotes the empty grid of its space dimension.
  explicit Grid(const GridGeneratorSystem& ggs);

  dim_t space_dimension() const { return dim_; }
  // Dimension of the affine hull (lines and parameters both count).
  dim_t affine_dim() const;

  bool is_empty() const;
  bool is_universe() const;
  // True when every point of the grid is isolated (no lines; a pure lattice
  // translate counts as discrete).
  bool is_discrete() const;
  bool contains(const Grid& q) const;
  bool strictly_contains(const Grid& q) const;
  bool is_disjoint_from(const Grid& q) const;
  bool equals(const Grid& q) const;
  friend bool operator==(const Grid& p, const Grid& q) { return p.equals(q); }

  // Exact membership of a rational point (size = space dimension).
  bool contains_point(const std::vector<Rational>& coords) const;

  // Minimized canonical descriptions; the empty grid reports the canonical
  // inconsistent congruence / no generators.
  CongruenceSystem minimized_congruences() const;
  GridGeneratorSystem minimized_grid_generators() const;
  CongruenceSystem congruences() const;
  GridGeneratorSystem grid_generators() const;

  void add_congruence(const Congruence& cg);
  void add_congruences(const CongruenceSystem& cgs);
  // Pre: the grid is nonempty, or the generator is a grid point.
  void add_grid_generator(const GridGenerator& g);
  void add_grid_generators(const GridGeneratorSystem& gs);

  void intersection_assign(const Grid& q);
  // Smallest grid containing both (the join of the two lattices).
  void upper_bound_assign(const Grid& q);
  // Smallest grid containing the set difference *this \ q.
  void grid_difference_assign(const Grid& q);
  void time_elapse_assign(const Grid& q);

  void affine_image(Variable v, const LinearExpression& e,
                    const Coefficient& denominator = Coefficient(1));
  void affine_preimage(Variable v, const LinearExpression& e,
                       const Coefficient& denominator = Coefficient(1));
  // Image/preimage of v ≡ e/den (mod modulus); modulus 0 degenerates to the
  // plain affine transfer.
  void generalized_affine_image(Variable v, const LinearExpression& e,
                                const Coefficient& denominator,
                                const Coefficient& modulus);
  void generalized_affine_preimage(Variable v, const LinearExpression& e,
                                   const Coefficient& denominator,
                                   const Coefficient& modulus);

  void add_space_dimensions_and_embed(dim_t m);
  void add_space_dimensions_and_project(dim_t m);
  void remove_space_dimensions(const std::set<dim_t>& dims);
  void remove_higher_space_dimensions(dim_t new_dim);
  // Partial injective map old dim -> new dim; unmapped dimensions dropped.
  void map_space_dimensions(const std::vector<std::optional<dim_t>>& map,
                            dim_t new_dim);
  void concatenate_assign(const Grid& q);

  // Widening: *this is the previous iterate p with p ⊆ q; keeps exactly the
  // minimized congruences of p that q still satisfies. Any drop strictly
  // shrinks (#proper congruences + 2·#equalities), so chains stabilize.
  void widening_grid_assign(const Grid& q, unsigned* tokens = nullptr);

  std::string ascii_dump() const;

 private:
  // Homogeneous rational row/column over (x_0..x_{n-1}, δ); a congruence row
  // r means r·(x,1) ∈ ℤ (proper) or r·(x,1) = 0 (equality).
  using HRow = std::vector<Rational>;

  struct Minimal {
    bool empty = false;
    // Congruence side: reduced equality rows, then the Hermite basis of the
    // proper-row lattice (the trivial row e_δ is implicit, never stored).
    std::vector<HRow> eqs, mods;
    // Generator side (coordinates only, no δ): base point, parameter basis
    // in Hermite form with the point reduced into its fundamental cell,
    // echelonized lines.
    std::vector<Rational> point;
    std::vector<std::vector<Rational>> params, lines;
  };

  dim_t dim_;
  mutable CongruenceSystem cgs_;
  mutable GridGeneratorSystem ggs_;
  mutable bool cgs_ok_ = false, ggs_ok_ = false;
  mutable bool minimized_ = false;
  mutable Minimal min_;  // valid when minimized_

  explicit Grid(dim_t dim, bool make_empty);

  void ensure_congruences() const;
  void ensure_generators() const;
  void minimize() const;
  void set_empty() const;
  void invalidate() const;

  // Raw user rows -> internal homogeneous rows.
  void collect_congruence_rows(std::vector<HRow>& eqs,
                               std::vector<HRow>& mods) const;
  // Returns false when the system has no point (empty grid).
  bool collect_generator_rows(std::vector<Rational>& point,
                              std::vector<std::vector<Rational>>& params,
                              std::vector<std::vector<Rational>>& lines) const;

  CongruenceSystem render_congruences() const;
  GridGeneratorSystem render_generators() const;

  bool satisfies_all_rows(const Grid& q) const;  // q's gens vs this->min_ rows

  void check_dims(const Grid& q, const char* op) const;
};

std::ostream& operator<<(std::ostream& os, const Grid& g);

}  // namespace polydom
