// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/linear_forms.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace polydom {

namespace {

// gcd of the magnitudes of all entries (and extra), 0 if everything is zero.
Coefficient gcd_of(const std::vector<Coefficient>& v, const Coefficient* extra,
                   const Coefficient* extra2 = nullptr) {
  Coefficient g(0);
  for (const Coefficient& c : v) g = Coefficient::gcd(g, c);
  if (extra) g = Coefficient::gcd(g, *extra);
  if (extra2) g = Coefficient::gcd(g, *extra2);
  return g;
}

void divide_all(std::vector<Coefficient>& v, const Coefficient& g) {
  for (Coefficient& c : v) c = Coefficient::div_exact(c, g);
}

int leading_sign(const std::vector<Coefficient>& v) {
  for (const Coefficient& c : v)
    if (!c.is_zero()) return c.sign();
  return 0;
}

void negate_all(std::vector<Coefficient>& v) {
  for (Coefficient& c : v) c = -c;
}

std::string format_terms(const std::vector<Coefficient>& coeffs) {
  std::string out;
  bool first = true;
  for (dim_t i = 0; i < coeffs.size(); ++i) {
    const Coefficient& c = coeffs[i];
    if (c.is_zero()) continue;
    Coefficient a = c.abs();
    if (first) {
      if (c.sign() < 0) out += "-";
      first = false;
    } else {
      out += c.sign() < 0 ? " - " : " + ";
    }
    if (!a.is_one()) {
      out += a.to_string();
      out += "*";
    }
    out += Variable::name(i);
  }
  if (first) out = "0";
  return out;
}

std::string format_tuple(const std::vector<Coefficient>& coeffs) {
  std::string out = "(";
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i) out += ", ";
    out += coeffs[i].to_string();
  }
  out += ")";
  return out;
}

}  // namespace

std::string Variable::name(dim_t id) {
  std::string s(1, static_cast<char>('A' + id % 26));
  if (id >= 26) s += std::to_string(id / 26);
  return s;
}

LinearExpression::LinearExpression(Variable v) : inhom_(0) {
  coeffs_.resize(v.id() + 1, Coefficient(0));
  coeffs_[v.id()] = Coefficient(1);
}

LinearExpression LinearExpression::from_terms(
    const std::vector<std::pair<dim_t, Coefficient>>& terms,
    const Coefficient& inhom) {
  LinearExpression e;
  for (const auto& [d, c] : terms) {
    e.extend_to(d + 1);
    e.coeffs_[d] += c;
  }
  e.inhom_ = inhom;
  return e;
}

const Coefficient& LinearExpression::zero_coefficient() {
  static const Coefficient zero(0);
  return zero;
}

const Coefficient& LinearExpression::coefficient(Variable v) const {
  if (v.id() >= coeffs_.size()) return zero_coefficient();
  return coeffs_[v.id()];
}

void LinearExpression::set_coefficient(Variable v, const Coefficient& c) {
  extend_to(v.id() + 1);
  coeffs_[v.id()] = c;
}

bool LinearExpression::is_zero() const {
  return inhom_.is_zero() && homogeneous_part_is_zero();
}

bool LinearExpression::homogeneous_part_is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Coefficient& c) { return c.is_zero(); });
}

void LinearExpression::extend_to(dim_t dim) {
  if (coeffs_.size() < dim) coeffs_.resize(dim, Coefficient(0));
}

LinearExpression& LinearExpression::operator+=(const LinearExpression& e) {
  extend_to(e.coeffs_.size());
  for (dim_t i = 0; i < e.coeffs_.size(); ++i) coeffs_[i] += e.coeffs_[i];
  inhom_ += e.inhom_;
  return *this;
}

LinearExpression& LinearExpression::operator-=(const LinearExpression& e) {
  extend_to(e.coeffs_.size());
  for (dim_t i = 0; i < e.coeffs_.size(); ++i) coeffs_[i] -= e.coeffs_[i];
  inhom_ -= e.inhom_;
  return *this;
}

LinearExpression& LinearExpression::operator*=(const Coefficient& c) {
  for (Coefficient& x : coeffs_) x *= c;
  inhom_ *= c;
  return *this;
}

LinearExpression LinearExpression::operator-() const {
  LinearExpression r = *this;
  negate_all(r.coeffs_);
  r.inhom_ = -r.inhom_;
  return r;
}

std::string LinearExpression::to_string() const {
  std::string out = format_terms(coeffs_);
  if (!inhom_.is_zero()) {
    if (out == "0") return inhom_.to_string();
    out += inhom_.sign() < 0 ? " - " : " + ";
    out += inhom_.abs().to_string();
  }
  return out;
}

LinearExpression operator+(LinearExpression a, const LinearExpression& b) {
  a += b;
  return a;
}

LinearExpression operator-(LinearExpression a, const LinearExpression& b) {
  a -= b;
  return a;
}

LinearExpression operator*(const Coefficient& c, LinearExpression e) {
  e *= c;
  return e;
}

LinearExpression operator*(long c, LinearExpression e) {
  e *= Coefficient(c);
  return e;
}

std::ostream& operator<<(std::ostream& os, const LinearExpression& e) {
  return os << e.to_string();
}

// ---------------------------------------------------------------------------

Constraint::Constraint(LinearExpression expr, RelKind kind)
    : expr_(std::move(expr)), kind_(kind) {
  Coefficient g = gcd_of(expr_.coeffs_, &expr_.inhom_);
  if (!g.is_zero() && !g.is_one()) {
    divide_all(expr_.coeffs_, g);
    expr_.inhom_ = Coefficient::div_exact(expr_.inhom_, g);
  }
  if (kind_ == RelKind::equal) {
    int s = leading_sign(expr_.coeffs_);
    if (s == 0) s = expr_.inhom_.sign();
    if (s < 0) {
      negate_all(expr_.coeffs_);
      expr_.inhom_ = -expr_.inhom_;
    }
  }
}

bool Constraint::is_tautology() const {
  if (!expr_.homogeneous_part_is_zero()) return false;
  int s = expr_.inhomogeneous_term().sign();
  switch (kind_) {
    case RelKind::equal: return s == 0;
    case RelKind::nonstrict: return s >= 0;
    case RelKind::strict: return s > 0;
  }
  return false;
}

bool Constraint::is_inconsistent() const {
  return expr_.homogeneous_part_is_zero() && !is_tautology();
}

std::string Constraint::to_string() const {
  const char* rel = kind_ == RelKind::equal      ? " = "
                    : kind_ == RelKind::nonstrict ? " >= "
                                                  : " > ";
  return format_terms(expr_.coeffs_) + rel + (-expr_.inhom_).to_string();
}

Constraint operator>=(LinearExpression lhs, LinearExpression rhs) {
  lhs -= rhs;
  return Constraint(std::move(lhs), RelKind::nonstrict);
}

Constraint operator<=(LinearExpression lhs, LinearExpression rhs) {
  rhs -= lhs;
  return Constraint(std::move(rhs), RelKind::nonstrict);
}

Constraint operator>(LinearExpression lhs, LinearExpression rhs) {
  lhs -= rhs;
  return Constraint(std::move(lhs), RelKind::strict);
}

Constraint operator<(LinearExpression lhs, LinearExpression rhs) {
  rhs -= lhs;
  return Constraint(std::move(rhs), RelKind::strict);
}

Constraint operator==(LinearExpression lhs, LinearExpression rhs) {
  lhs -= rhs;
  return Constraint(std::move(lhs), RelKind::equal);
}

std::ostream& operator<<(std::ostream& os, const Constraint& c) {
  return os << c.to_string();
}

// ---------------------------------------------------------------------------

Generator::Generator(GenKind kind, std::vector<Coefficient> coeffs,
                     Coefficient divisor)
    : kind_(kind), coeffs_(std::move(coeffs)), divisor_(std::move(divisor)) {
  if (kind_ == GenKind::point || kind_ == GenKind::closure_point) {
    if (divisor_.sign() <= 0)
      throw DomainError(ErrorKind::invalid_argument,
                        "point divisor must be positive");
    Coefficient g = gcd_of(coeffs_, &divisor_);
    if (!g.is_one() && !g.is_zero()) {
      divide_all(coeffs_, g);
      divisor_ = Coefficient::div_exact(divisor_, g);
    }
  } else {
    if (std::all_of(coeffs_.begin(), coeffs_.end(),
                    [](const Coefficient& c) { return c.is_zero(); }))
      throw DomainError(ErrorKind::invalid_argument,
                        "ray/line direction must be nonzero");
    Coefficient g = gcd_of(coeffs_, nullptr);
    if (!g.is_one()) divide_all(coeffs_, g);
    if (kind_ == GenKind::line && leading_sign(coeffs_) < 0)
      negate_all(coeffs_);
    divisor_ = Coefficient(1);
  }
}

Generator Generator::point(const LinearExpression& e,
                           const Coefficient& divisor) {
  if (!e.inhomogeneous_term().is_zero())
    throw DomainError(ErrorKind::invalid_argument,
                      "generator built from non-homogeneous expression");
  std::vector<Coefficient> coeffs;
  for (dim_t i = 0; i < e.space_dimension(); ++i)
    coeffs.push_back(e.coefficient(Variable(i)));
  return Generator(GenKind::point, std::move(coeffs), divisor);
}

Generator Generator::closure_point(const LinearExpression& e,
                                   const Coefficient& divisor) {
  Generator g = point(e, divisor);
  g.kind_ = GenKind::closure_point;
  return g;
}

Generator Generator::ray(const LinearExpression& e) {
  Generator g = point(e, Coefficient(1));
  return Generator(GenKind::ray, g.coeffs_, Coefficient(1));
}

Generator Generator::line(const LinearExpression& e) {
  Generator g = point(e, Coefficient(1));
  return Generator(GenKind::line, g.coeffs_, Coefficient(1));
}

Generator Generator::point_from_rationals(const std::vector<Rational>& coords) {
  Coefficient d(1);
  for (const Rational& q : coords) d = Coefficient::lcm(d, q.den());
  std::vector<Coefficient> c;
  c.reserve(coords.size());
  for (const Rational& q : coords)
    c.push_back(q.num() * Coefficient::div_exact(d, q.den()));
  return Generator(GenKind::point, std::move(c), d);
}

const Coefficient& Generator::coefficient(Variable v) const {
  static const Coefficient zero(0);
  return v.id() < coeffs_.size() ? coeffs_[v.id()] : zero;
}

Rational Generator::coordinate(Variable v) const {
  if (kind_ != GenKind::point && kind_ != GenKind::closure_point)
    throw DomainError(ErrorKind::invalid_argument,
                      "coordinate() on a direction");
  return Rational(coefficient(v), divisor_);
}

std::string Generator::to_string() const {
  switch (kind_) {
    case GenKind::line: return "line(" + format_tuple(coeffs_) + ")";
    case GenKind::ray: return "ray(" + format_tuple(coeffs_) + ")";
    case GenKind::point:
    case GenKind::closure_point: {
      std::string body = format_tuple(coeffs_);
      if (!divisor_.is_one()) body += "/" + divisor_.to_string();
      return (kind_ == GenKind::point ? "point(" : "closure_point(") + body + ")";
    }
  }
  return "";
}

std::ostream& operator<<(std::ostream& os, const Generator& g) {
  return os << g.to_string();
}

SatResult satisfies(const Generator& g, const Constraint& c) {
  if (g.space_dimension() != c.space_dimension())
    throw DomainError(ErrorKind::dimension_mismatch,
                      "generator and constraint dimensions differ");
  Coefficient prod(0);
  for (dim_t i = 0; i < g.space_dimension(); ++i)
    prod += c.coefficient(Variable(i)) * g.coefficient(Variable(i));
  if (g.kind() == GenKind::point || g.kind() == GenKind::closure_point)
    prod += c.inhomogeneous_term() * g.divisor();
  int s = prod.sign();
  if (s == 0) return SatResult::saturates;
  if (c.is_equality()) return SatResult::violates;
  return s > 0 ? SatResult::satisfies : SatResult::violates;
}

// ---------------------------------------------------------------------------

Congruence::Congruence(LinearExpression expr, Coefficient modulus)
    : expr_(std::move(expr)), modulus_(std::move(modulus)) {
  normalize();
}

Congruence Congruence::make(const LinearExpression& expr,
                            const Coefficient& rhs, const Coefficient& modulus) {
  LinearExpression e = expr;
  e.set_inhomogeneous_term(e.inhomogeneous_term() - rhs);
  return Congruence(std::move(e), modulus);
}

Congruence Congruence::equality(const LinearExpression& expr) {
  return Congruence(expr, Coefficient(0));
}

void Congruence::normalize() {
  if (modulus_.sign() < 0) modulus_ = -modulus_;
  Coefficient g = gcd_of(expr_.coeffs_, &expr_.inhom_, &modulus_);
  if (!g.is_zero() && !g.is_one()) {
    divide_all(expr_.coeffs_, g);
    expr_.inhom_ = Coefficient::div_exact(expr_.inhom_, g);
    modulus_ = Coefficient::div_exact(modulus_, g);
  }
  if (modulus_.is_zero()) {
    // Plain equality: same sign convention as Constraint.
    int s = leading_sign(expr_.coeffs_);
    if (s == 0) s = expr_.inhom_.sign();
    if (s < 0) {
      negate_all(expr_.coeffs_);
      expr_.inhom_ = -expr_.inhom_;
    }
    return;
  }
  // Shift the inhomogeneous term so the displayed rhs -inhom is in [0, f).
  Coefficient r = expr_.inhom_ - modulus_ * Coefficient::div_floor(expr_.inhom_, modulus_);
  expr_.inhom_ = r.is_zero() ? r : r - modulus_;
}

bool Congruence::is_tautology() const {
  if (!expr_.homogeneous_part_is_zero()) return false;
  if (modulus_.is_zero()) return expr_.inhomogeneous_term().is_zero();
  Coefficient r = expr_.inhomogeneous_term() -
                  modulus_ * Coefficient::div_floor(expr_.inhomogeneous_term(),
                                                    modulus_);
  return r.is_zero();
}

bool Congruence::is_inconsistent() const {
  return expr_.homogeneous_part_is_zero() && !is_tautology();
}

bool Congruence::satisfied_by(const std::vector<Rational>& point) const {
  if (point.size() < space_dimension())
    throw DomainError(ErrorKind::dimension_mismatch,
                      "point dimension below congruence dimension");
  Rational v(expr_.inhomogeneous_term());
  for (dim_t i = 0; i < space_dimension(); ++i)
    v += Rational(expr_.coefficient(Variable(i))) * point[i];
  if (modulus_.is_zero()) return v.is_zero();
  return (v / Rational(modulus_)).is_integer();
}

std::string Congruence::to_string() const {
  std::string out = format_terms(expr_.coeffs_) + " = " +
                    (-expr_.inhom_).to_string();
  if (!modulus_.is_zero()) out += " (mod " + modulus_.to_string() + ")";
  return out;
}

std::ostream& operator<<(std::ostream& os, const Congruence& cg) {
  return os << cg.to_string();
}

// ---------------------------------------------------------------------------

GridGenerator::GridGenerator(GridGenKind kind, std::vector<Coefficient> coeffs,
                             Coefficient divisor)
    : kind_(kind), coeffs_(std::move(coeffs)), divisor_(std::move(divisor)) {
  if (kind_ == GridGenKind::grid_line) {
    if (std::all_of(coeffs_.begin(), coeffs_.end(),
                    [](const Coefficient& c) { return c.is_zero(); }))
      throw DomainError(ErrorKind::invalid_argument,
                        "grid line direction must be nonzero");
    Coefficient g = gcd_of(coeffs_, nullptr);
    if (!g.is_one()) divide_all(coeffs_, g);
    if (leading_sign(coeffs_) < 0) negate_all(coeffs_);
    divisor_ = Coefficient(1);
    return;
  }
  if (divisor_.sign() <= 0)
    throw DomainError(ErrorKind::invalid_argument,
                      "grid generator divisor must be positive");
  if (kind_ == GridGenKind::parameter &&
      std::all_of(coeffs_.begin(), coeffs_.end(),
                  [](const Coefficient& c) { return c.is_zero(); }))
    throw DomainError(ErrorKind::invalid_argument,
                      "parameter direction must be nonzero");
  Coefficient g = gcd_of(coeffs_, &divisor_);
  if (!g.is_one() && !g.is_zero()) {
    divide_all(coeffs_, g);
    divisor_ = Coefficient::div_exact(divisor_, g);
  }
}

GridGenerator GridGenerator::grid_point(const LinearExpression& e,
                                        const Coefficient& divisor) {
  if (!e.inhomogeneous_term().is_zero())
    throw DomainError(ErrorKind::invalid_argument,
                      "grid generator from non-homogeneous expression");
  std::vector<Coefficient> coeffs;
  for (dim_t i = 0; i < e.space_dimension(); ++i)
    coeffs.push_back(e.coefficient(Variable(i)));
  return GridGenerator(GridGenKind::grid_point, std::move(coeffs), divisor);
}

GridGenerator GridGenerator::parameter(const LinearExpression& e,
                                       const Coefficient& divisor) {
  GridGenerator g = grid_point(e, divisor);
  return GridGenerator(GridGenKind::parameter, g.coeffs_, g.divisor_);
}

GridGenerator GridGenerator::grid_line(const LinearExpression& e) {
  GridGenerator g = grid_point(e, Coefficient(1));
  return GridGenerator(GridGenKind::grid_line, g.coeffs_, Coefficient(1));
}

const Coefficient& GridGenerator::coefficient(Variable v) const {
  static const Coefficient zero(0);
  return v.id() < coeffs_.size() ? coeffs_[v.id()] : zero;
}

Rational GridGenerator::coordinate(Variable v) const {
  return Rational(coefficient(v), divisor_);
}

std::string GridGenerator::to_string() const {
  std::string body = format_tuple(coeffs_);
  if (kind_ == GridGenKind::grid_line) return "grid_line(" + body + ")";
  if (!divisor_.is_one()) body += "/" + divisor_.to_string();
  return (kind_ == GridGenKind::grid_point ? "grid_point(" : "parameter(") +
         body + ")";
}

std::ostream& operator<<(std::ostream& os, const GridGenerator& g) {
  return os << g.to_string();
}

// ---------------------------------------------------------------------------

bool ConstraintSystem::has_strict_inequalities() const {
  return std::any_of(begin(), end(),
                     [](const Constraint& c) { return c.is_strict(); });
}

bool ConstraintSystem::has_equalities() const {
  return std::any_of(begin(), end(),
                     [](const Constraint& c) { return c.is_equality(); });
}

bool GeneratorSystem::has_points() const {
  return std::any_of(begin(), end(),
                     [](const Generator& g) { return g.is_point(); });
}

bool GridGeneratorSystem::has_points() const {
  return std::any_of(begin(), end(), [](const GridGenerator& g) {
    return g.kind() == GridGenKind::grid_point;
  });
}

namespace {
template <typename Sys>
std::string join_rows(const Sys& s) {
  std::string out;
  bool first = true;
  for (const auto& row : s) {
    if (!first) out += ", ";
    out += row.to_string();
    first = false;
  }
  return out;
}
}  // namespace

std::string ConstraintSystem::to_string() const { return join_rows(*this); }
std::string GeneratorSystem::to_string() const { return join_rows(*this); }
std::string CongruenceSystem::to_string() const { return join_rows(*this); }
std::string GridGeneratorSystem::to_string() const { return join_rows(*this); }

std::ostream& operator<<(std::ostream& os, const ConstraintSystem& s) {
  return os << s.to_string();
}
std::ostream& operator<<(std::ostream& os, const GeneratorSystem& s) {
  return os << s.to_string();
}
std::ostream& operator<<(std::ostream& os, const CongruenceSystem& s) {
  return os << s.to_string();
}
std::ostream& operator<<(std::ostream& os, const GridGeneratorSystem& s) {
  return os << s.to_string();
}

}  // namespace polydom
