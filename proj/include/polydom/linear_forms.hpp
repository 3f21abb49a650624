// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Symbolic vocabulary shared by every domain: linear expressions over exact
// integer coefficients, constraints (=, >=, >), polyhedron generators,
// congruences and grid generators, plus growable systems of each.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "polydom/core.hpp"

namespace polydom {

using dim_t = std::size_t;

class Variable {
 public:
  explicit Variable(dim_t id) : id_(id) {}
  dim_t id() const { return id_; }
  // Display names run A..Z, then A1..Z1, A2..Z2, ...
  static std::string name(dim_t id);

 private:
  dim_t id_;
};

// a1*x1 + ... + an*xn + b, exact coefficients.
class LinearExpression {
 public:
  LinearExpression() : inhom_(0) {}
  LinearExpression(const Coefficient& c) : inhom_(c) {}
  LinearExpression(long c) : inhom_(c) {}
  LinearExpression(int c) : inhom_(static_cast<long>(c)) {}
  LinearExpression(Variable v);

  static LinearExpression from_terms(
      const std::vector<std::pair<dim_t, Coefficient>>& terms,
      const Coefficient& inhom);

  dim_t space_dimension() const { return coeffs_.size(); }
  const Coefficient& coefficient(Variable v) const;
  const Coefficient& inhomogeneous_term() const { return inhom_; }
  void set_coefficient(Variable v, const Coefficient& c);
  void set_inhomogeneous_term(const Coefficient& c) { inhom_ = c; }

  bool is_zero() const;
  bool homogeneous_part_is_zero() const;

  // Grows the expression to at least dim dimensions (new coefficients 0).
  void extend_to(dim_t dim);

  LinearExpression& operator+=(const LinearExpression& e);
  LinearExpression& operator-=(const LinearExpression& e);
  LinearExpression& operator*=(const Coefficient& c);
  LinearExpression operator-() const;

  std::string to_string() const;

 private:
  std::vector<Coefficient> coeffs_;
  Coefficient inhom_;
  friend class Constraint;
  friend class Congruence;
  static const Coefficient& zero_coefficient();
};

LinearExpression operator+(LinearExpression a, const LinearExpression& b);
LinearExpression operator-(LinearExpression a, const LinearExpression& b);
LinearExpression operator*(const Coefficient& c, LinearExpression e);
LinearExpression operator*(long c, LinearExpression e);
std::ostream& operator<<(std::ostream& os, const LinearExpression& e);

enum class RelKind { equal, nonstrict, strict };  // expr = 0, >= 0, > 0

// Stored as expr relop 0, normalized: the coefficient gcd (including the
// inhomogeneous term) is divided out, and equalities fix the sign of the
// leading nonzero coefficient positive.
class Constraint {
 public:
  Constraint(LinearExpression expr, RelKind kind);

  dim_t space_dimension() const { return expr_.space_dimension(); }
  RelKind kind() const { return kind_; }
  bool is_equality() const { return kind_ == RelKind::equal; }
  bool is_strict() const { return kind_ == RelKind::strict; }
  const Coefficient& coefficient(Variable v) const {
    return expr_.coefficient(v);
  }
  const Coefficient& inhomogeneous_term() const {
    return expr_.inhomogeneous_term();
  }
  const LinearExpression& expression() const { return expr_; }

  // 0 relop 0 rows that hold everywhere / nowhere.
  bool is_tautology() const;
  bool is_inconsistent() const;

  std::string to_string() const;  // "a1*A + ... relop b"

 private:
  LinearExpression expr_;
  RelKind kind_;
};

Constraint operator>=(LinearExpression lhs, LinearExpression rhs);
Constraint operator<=(LinearExpression lhs, LinearExpression rhs);
Constraint operator>(LinearExpression lhs, LinearExpression rhs);
Constraint operator<(LinearExpression lhs, LinearExpression rhs);
Constraint operator==(LinearExpression lhs, LinearExpression rhs);
std::ostream& operator<<(std::ostream& os, const Constraint& c);

enum class GenKind { line, ray, point, closure_point };

// Lines/rays are directions with gcd-normalized coordinates (line sign is
// also fixed); points and closure points carry a positive divisor and are
// normalized by the gcd of coordinates and divisor together.
class Generator {
 public:
  static Generator point(const LinearExpression& e,
                         const Coefficient& divisor = Coefficient(1));
  static Generator closure_point(const LinearExpression& e,
                                 const Coefficient& divisor = Coefficient(1));
  static Generator ray(const LinearExpression& e);
  static Generator line(const LinearExpression& e);
  // Exact rational point: coordinates brought to a common denominator.
  static Generator point_from_rationals(const std::vector<Rational>& coords);

  GenKind kind() const { return kind_; }
  bool is_point() const { return kind_ == GenKind::point; }
  dim_t space_dimension() const { return coeffs_.size(); }
  const Coefficient& coefficient(Variable v) const;
  const Coefficient& divisor() const { return divisor_; }
  const std::vector<Coefficient>& coefficients() const { return coeffs_; }
  Rational coordinate(Variable v) const;  // pre: point or closure_point

  std::string to_string() const;

 private:
  Generator(GenKind kind, std::vector<Coefficient> coeffs, Coefficient divisor);
  GenKind kind_;
  std::vector<Coefficient> coeffs_;
  Coefficient divisor_;
};

std::ostream& operator<<(std::ostream& os, const Generator& g);

// Three-way sign classification of a generator against a constraint; callers
// fold in strictness. Pre: equal space dimensions.
enum class SatResult { saturates, satisfies, violates };
SatResult satisfies(const Generator& g, const Constraint& c);

// expr ≡ 0 (mod modulus); modulus = 0 encodes the equality expr = 0.
// Normalized: gcd of all coefficients and the modulus divided out, modulus
// kept nonnegative, and the inhomogeneous term reduced so that the displayed
// right-hand side lies in [0, modulus).
class Congruence {
 public:
  Congruence(LinearExpression expr, Coefficient modulus);
  // expr ≡ rhs (mod modulus)
  static Congruence make(const LinearExpression& expr, const Coefficient& rhs,
                         const Coefficient& modulus);
  static Congruence equality(const LinearExpression& expr);

  dim_t space_dimension() const { return expr_.space_dimension(); }
  const Coefficient& modulus() const { return modulus_; }
  bool is_equality() const { return modulus_.is_zero(); }
  const Coefficient& coefficient(Variable v) const {
    return expr_.coefficient(v);
  }
  const Coefficient& inhomogeneous_term() const {
    return expr_.inhomogeneous_term();
  }
  const LinearExpression& expression() const { return expr_; }

  bool is_tautology() const;
  bool is_inconsistent() const;

  // Exact membership of a rational point.
  bool satisfied_by(const std::vector<Rational>& point) const;

  std::string to_string() const;  // "a1*A + ... = b (mod f)" or "... = b"

 private:
  LinearExpression expr_;
  Coefficient modulus_;
  void normalize();
};

std::ostream& operator<<(std::ostream& os, const Congruence& cg);

enum class GridGenKind { grid_line, parameter, grid_point };

class GridGenerator {
 public:
  static GridGenerator grid_point(const LinearExpression& e,
                                  const Coefficient& divisor = Coefficient(1));
  static GridGenerator parameter(const LinearExpression& e,
                                 const Coefficient& divisor = Coefficient(1));
  static GridGenerator grid_line(const LinearExpression& e);

  GridGenKind kind() const { return kind_; }
  dim_t space_dimension() const { return coeffs_.size(); }
  const Coefficient& coefficient(Variable v) const;
  const Coefficient& divisor() const { return divisor_; }
  const std::vector<Coefficient>& coefficients() const { return coeffs_; }
  Rational coordinate(Variable v) const;

  std::string to_string() const;

 private:
  GridGenerator(GridGenKind kind, std::vector<Coefficient> coeffs,
                Coefficient divisor);
  GridGenKind kind_;
  std::vector<Coefficient> coeffs_;
  Coefficient divisor_;
};

std::ostream& operator<<(std::ostream& os, const GridGenerator& g);

// Row containers. Insertion keeps amortized O(1) growth; the system's space
// dimension is the maximum of its rows' and can be widened explicitly.
template <typename Row>
class System {
 public:
  System() = default;
  explicit System(dim_t dim) : dim_(dim) {}

  dim_t space_dimension() const { return dim_; }
  void set_space_dimension(dim_t d) { dim_ = d < dim_ ? dim_ : d; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const Row& operator[](std::size_t i) const { return rows_[i]; }
  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

  void insert(Row r) {
    if (r.space_dimension() > dim_) dim_ = r.space_dimension();
    rows_.push_back(std::move(r));
  }
  void clear() { rows_.clear(); }

 private:
  std::vector<Row> rows_;
  dim_t dim_ = 0;
};

class ConstraintSystem : public System<Constraint> {
 public:
  using System::System;
  bool has_strict_inequalities() const;
  bool has_equalities() const;
  std::string to_string() const;
};

class GeneratorSystem : public System<Generator> {
 public:
  using System::System;
  bool has_points() const;
  std::string to_string() const;
};

class CongruenceSystem : public System<Congruence> {
 public:
  using System::System;
  std::string to_string() const;
};

class GridGeneratorSystem : public System<GridGenerator> {
 public:
  using System::System;
  bool has_points() const;
  std::string to_string() const;
};

std::ostream& operator<<(std::ostream& os, const ConstraintSystem& s);
std::ostream& operator<<(std::ostream& os, const GeneratorSystem& s);
std::ostream& operator<<(std::ostream& os, const CongruenceSystem& s);
std::ostream& operator<<(std::ostream& os, const GridGeneratorSystem& s);

}  // namespace polydom
