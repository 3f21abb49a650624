// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Octagonal shapes: conjunctions of constraints +-x +-y <= d and +-x <= d.
// State is a dense 2n-by-2n matrix over a bound family, two matrix indices
// per variable: index 2i stands for +v_i and index 2i+1 for -v_i, and
// m[i][j] bounds vhat_j - vhat_i. Writing i^1 for the partner index, every
// matrix is kept coherent -- m[i][j] == m[j^1][i^1], the two encodings of
// one constraint -- and unary constraints live doubled on the pair slots:
// m[2i+1][2i] bounds 2*v_i and m[2i][2i+1] bounds -2*v_i.
//
// The canonical form is the strong closure: shortest-path closure followed
// by one strengthening sweep
//
//   m[i][j] := min(m[i][j], (m[i][i^1] + m[j^1][j]) / 2)
//
// propagating unary bounds into binary ones. The sweep never changes a
// unary entry, so one in-place pass suffices over exact bounds; integral
// families first round unary entries down to even, which keeps the halving
// exact and yields the tight integer closure. Lazy caching of closure and
// emptiness works as in BdShape.

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "polydom/bd_shape.hpp"
#include "polydom/core.hpp"
#include "polydom/dbm.hpp"
#include "polydom/linear_forms.hpp"

namespace polydom {

// Strong closure of a coherent octagonal bound matrix with edge k = 2n,
// in place. Returns false when the constraints are unsatisfiable; the
// matrix then holds the evidence and nothing more.
template <typename F>
bool oct_strong_closure(std::vector<typename F::Bound>& m, std::size_t k) {
  using Bound = typename F::Bound;
  if (!shortest_path_closure<F>(m, k)) return false;
  if constexpr (F::integral) {
    for (std::size_t i = 0; i < k; ++i)
      m[i * k + (i ^ 1)] = F::even_down(m[i * k + (i ^ 1)]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    budget_checkpoint();
    const Bound row_unary = m[i * k + (i ^ 1)];
    if (!F::is_finite(row_unary)) continue;
    for (std::size_t j = 0; j < k; ++j) {
      const Bound& col_unary = m[(j ^ 1) * k + j];
      if (!F::is_finite(col_unary)) continue;
      Bound s = F::half_sum(row_unary, col_unary);
      if (F::lt(s, m[i * k + j])) m[i * k + j] = std::move(s);
    }
  }
  // The sweep writes half of m[i][i^1] + m[i^1][i] onto the diagonal: a
  // negative value there is exactly an unsatisfiable unary pair.
  for (std::size_t i = 0; i < k; ++i)
    if (F::lt(m[i * k + i], F::zero())) return false;
  return true;
}

template <typename F = RationalBounds>
class OctShape {
 public:
  using Family = F;
  using Bound = typename F::Bound;

  // The universe shape: no constraints.
  explicit OctShape(dim_t dim = 0)
      : dim_(dim), m_(4 * static_cast<std::size_t>(dim) * dim, F::infinity()) {
    reset_diagonal();
  }

  static OctShape universe(dim_t dim) { return OctShape(dim); }
  static OctShape empty(dim_t dim) {
    OctShape s(dim);
    s.empty_ = true;
    return s;
  }

  explicit OctShape(const ConstraintSystem& cs,
                    ShapePolicy policy = ShapePolicy::over_approximate)
      : OctShape(cs.space_dimension()) {
    add_constraints(cs, policy);
  }

  // Exact embedding of a bounded-difference shape on the same dimensions.
  explicit OctShape(const BdShape<F>& b) : OctShape(b.space_dimension()) {
    if (b.is_empty()) {
      set_empty();
      return;
    }
    for (std::size_t i = 0; i <= dim_; ++i)
      for (std::size_t j = 0; j <= dim_; ++j) {
        if (i == j) continue;
        Bound d = b.difference_bound(i, j);
        if (!F::is_finite(d)) continue;
        if (i == 0) {
          tighten(2 * (j - 1) + 1, 2 * (j - 1), F::add(d, d));  // v_j <= d
        } else if (j == 0) {
          tighten(2 * (i - 1), 2 * (i - 1) + 1, F::add(d, d));  // -v_i <= d
        } else {
          tighten_pair(2 * (i - 1), 2 * (j - 1), std::move(d));
        }
      }
  }

  dim_t space_dimension() const { return dim_; }

  bool is_empty() const {
    ensure_closed();
    return empty_;
  }

  bool is_universe() const {
    if (empty_) return false;
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t j = 0; j < k(); ++j)
        if (i != j && F::is_finite(at(i, j))) return false;
    return true;
  }

  bool contains(const OctShape& q) const {
    check_same_dim(q, "OctShape::contains");
    if (q.is_empty()) return true;
    if (is_empty()) return false;
    ensure_closed();
    q.ensure_closed();
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (F::lt(m_[i], q.m_[i])) return false;
    return true;
  }

  bool equals(const OctShape& q) const {
    check_same_dim(q, "OctShape::equals");
    if (is_empty()) return q.is_empty();
    if (q.is_empty()) return false;
    ensure_closed();
    q.ensure_closed();
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (!F::eq(m_[i], q.m_[i])) return false;
    return true;
  }
  friend bool operator==(const OctShape& p, const OctShape& q) {
    return p.equals(q);
  }
  friend bool operator!=(const OctShape& p, const OctShape& q) {
    return !p.equals(q);
  }

  bool is_disjoint_from(const OctShape& q) const {
    OctShape t(*this);
    t.intersection_assign(q);
    return t.is_empty();
  }

  // Strongly closed entry view over the doubled indices (2i is +v_i, 2i+1 is
  // -v_i); unary slots carry doubled bounds. Requires a nonempty shape.
  Bound octagonal_bound(std::size_t i, std::size_t j) const {
    if (i >= k() || j >= k())
      throw DomainError(ErrorKind::dimension_mismatch,
                        "OctShape::octagonal_bound: index out of range");
    if (is_empty())
      throw DomainError(ErrorKind::invalid_argument,
                        "OctShape::octagonal_bound: shape is empty");
    return at(i, j);
  }

  // Adds c when it involves at most two variables with coefficients of equal
  // magnitude -- the octagonal carrier. Strict inequalities never fit;
  // anything else follows `policy`.
  void add_constraint(const Constraint& c,
                      ShapePolicy policy = ShapePolicy::over_approximate) {
    if (c.space_dimension() > dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "OctShape::add_constraint: constraint dimension "
                        "exceeds the shape's");
    if (c.is_strict())
      throw DomainError(ErrorKind::topology_mismatch,
                        "OctShape::add_constraint: strict constraint on a "
                        "topologically closed domain");
    if (empty_) return;
    if (c.is_tautology()) return;
    if (c.is_inconsistent()) {
      set_empty();
      return;
    }
    auto pat = unit_pattern(c.expression());
    if (!pat) {
      if (policy == ShapePolicy::reject)
        throw DomainError(ErrorKind::invalid_argument,
                          "OctShape::add_constraint: not an octagonal "
                          "constraint");
      return;
    }
    apply(*pat);
    if (c.is_equality()) apply(negated(*pat));
  }

  void add_constraints(const ConstraintSystem& cs,
                       ShapePolicy policy = ShapePolicy::over_approximate) {
    for (const Constraint& c : cs) add_constraint(c, policy);
  }

  // The strongly closed form as integer-coefficient constraints. Each
  // coherent entry pair is exported once; a bound p/q on vhat_j - vhat_i
  // leaves as p + q*vhat_i - q*vhat_j >= 0 with the signed variables spelled
  // out, so unary rows arrive doubled and the constraint normalizer halves
  // them. Empty shapes export one inconsistent row, the universe none.
  ConstraintSystem constraints() const {
    ConstraintSystem cs(dim_);
    if (is_empty()) {
      cs.insert(Constraint(LinearExpression::from_terms({}, Coefficient(-1)),
                           RelKind::nonstrict));
      return cs;
    }
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t j = 0; j < k(); ++j) {
        if (i == j || !F::is_finite(at(i, j))) continue;
        if (std::make_pair(j ^ 1, i ^ 1) < std::make_pair(i, j)) continue;
        Rational d = F::to_rational(at(i, j));
        std::vector<Coefficient> coeffs(dim_, Coefficient(0));
        coeffs[i / 2] += i % 2 == 0 ? d.den() : -d.den();
        coeffs[j / 2] += j % 2 == 0 ? -d.den() : d.den();
        std::vector<std::pair<dim_t, Coefficient>> terms;
        for (dim_t v = 0; v < dim_; ++v)
          if (!coeffs[v].is_zero()) terms.emplace_back(v, coeffs[v]);
        cs.insert(Constraint(LinearExpression::from_terms(terms, d.num()),
                             RelKind::nonstrict));
      }
    return cs;
  }

  void intersection_assign(const OctShape& q) {
    check_same_dim(q, "OctShape::intersection_assign");
    if (empty_) return;
    if (q.empty_) {
      set_empty();
      return;
    }
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (F::lt(q.m_[i], m_[i])) {
        m_[i] = q.m_[i];
        closed_ = false;
      }
  }

  // Join: entrywise maximum of the strongly closed forms; maxima of strongly
  // closed matrices stay strongly closed.
  void upper_bound_assign(const OctShape& q) {
    check_same_dim(q, "OctShape::upper_bound_assign");
    if (q.is_empty()) return;
    if (is_empty()) {
      *this = q;
      return;
    }
    ensure_closed();
    q.ensure_closed();
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (F::lt(m_[i], q.m_[i])) m_[i] = q.m_[i];
  }

  // Widening; the same discipline as BdShape::widening_bds_assign: *this is
  // put in strongly closed form, q is taken exactly as given.
  void widening_octs_assign(const OctShape& q, unsigned* tokens = nullptr) {
    check_same_dim(q, "OctShape::widening_octs_assign");
    if (is_empty()) {
      *this = q;
      return;
    }
    ensure_closed();
    OctShape cand(*this);
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (!F::le(q.m_[i], cand.m_[i])) cand.m_[i] = F::infinity();
    cand.reset_diagonal();
    cand.closed_ = false;
    if (tokens && *tokens > 0) {
      OctShape probe(cand);
      probe.ensure_closed();
      bool stable = !probe.empty_;
      for (std::size_t i = 0; stable && i < m_.size(); ++i)
        if (F::is_finite(q.m_[i]) && !F::le(probe.m_[i], q.m_[i]))
          stable = false;
      if (!stable) {
        --*tokens;
        *this = q;
        return;
      }
    }
    *this = std::move(cand);
  }

  void affine_image(Variable v, const LinearExpression& e,
                    const Coefficient& denominator = Coefficient(1)) {
    AffineForm f = parse_affine(v, e, denominator, "OctShape::affine_image");
    if (is_empty()) return;
    const std::size_t a = 2 * static_cast<std::size_t>(v.id());
    switch (f.kind) {
      case AffineForm::translation:
        shift_pair(a, f.offset);
        return;
      case AffineForm::reflection:
        // v := -v + c is the pair swap followed by a translation.
        swap_pair(a);
        shift_pair(a, f.offset);
        return;
      case AffineForm::unit_source: {
        // v := vhat_u + c for a signed source on another variable: the new
        // pair of rows and columns mirrors the source pair, shifted.
        ensure_closed();
        const std::size_t u = f.source, b = a + 1, ub = u ^ 1;
        for (std::size_t j = 0; j < k(); ++j) {
          if (j == a || j == b) continue;
          at(a, j) = F::add_rational(at(u, j), -f.offset);
          at(j, a) = F::add_rational(at(j, u), f.offset);
          at(b, j) = F::add_rational(at(ub, j), f.offset);
          at(j, b) = F::add_rational(at(j, ub), -f.offset);
        }
        at(a, b) = F::add_rational(at(u, ub), -(f.offset + f.offset));
        at(b, a) = F::add_rational(at(ub, u), f.offset + f.offset);
        closed_ = false;
        return;
      }
      case AffineForm::constant:
        ensure_closed();
        forget_pair(a);
        at(a, a + 1) = F::from_rational(-(f.offset + f.offset));
        at(a + 1, a) = F::from_rational(f.offset + f.offset);
        closed_ = false;
        return;
      case AffineForm::general: {
        ensure_closed();
        EvalInterval itv = box_interval(f.expr, f.den);
        forget_pair(a);
        if (itv.hi) tighten(a + 1, a, F::from_rational(*itv.hi + *itv.hi));
        if (itv.lo) tighten(a, a + 1, F::from_rational(-(*itv.lo + *itv.lo)));
        closed_ = false;
        return;
      }
    }
  }

  void affine_preimage(Variable v, const LinearExpression& e,
                       const Coefficient& denominator = Coefficient(1)) {
    AffineForm f = parse_affine(v, e, denominator, "OctShape::affine_preimage");
    if (is_empty()) return;
    const std::size_t a = 2 * static_cast<std::size_t>(v.id());
    switch (f.kind) {
      case AffineForm::translation:
        shift_pair(a, -f.offset);
        return;
      case AffineForm::reflection:
        // v := -v + c is an involution: its preimage is its image.
        swap_pair(a);
        shift_pair(a, f.offset);
        return;
      case AffineForm::unit_source: {
        // Substitute vhat_u + c for v in every bound on v, then forget v.
        ensure_closed();
        const std::size_t u = f.source, b = a + 1, ub = u ^ 1;
        for (std::size_t j = 0; j < k(); ++j) {
          if (j == a || j == b) continue;
          tighten_checked(u, j, F::add_rational(at(a, j), f.offset));
          tighten_checked(j, u, F::add_rational(at(j, a), -f.offset));
          tighten_checked(ub, j, F::add_rational(at(b, j), -f.offset));
          tighten_checked(j, ub, F::add_rational(at(j, b), f.offset));
          if (empty_) return;
        }
        tighten_checked(u, ub,
                        F::add_rational(at(a, b), f.offset + f.offset));
        tighten_checked(ub, u,
                        F::add_rational(at(b, a), -(f.offset + f.offset)));
        if (empty_) return;
        forget_pair(a);
        closed_ = false;
        return;
      }
      case AffineForm::constant: {
        // Bounds on v become unary facts about the other side or pure
        // feasibility tests against the constant.
        ensure_closed();
        const std::size_t b = a + 1;
        const Rational c2 = f.offset + f.offset;
        for (std::size_t j = 0; j < k(); ++j) {
          if (j == a || j == b) continue;
          // vhat_j - v <= d and vhat_j + v <= d, with v = c.
          tighten(j ^ 1, j, F::add_rational(F::add(at(a, j), at(a, j)), c2));
          tighten(j ^ 1, j, F::add_rational(F::add(at(b, j), at(b, j)), -c2));
          // v - vhat_j <= d and -v - vhat_j <= d.
          tighten(j, j ^ 1, F::add_rational(F::add(at(j, a), at(j, a)), -c2));
          tighten(j, j ^ 1, F::add_rational(F::add(at(j, b), at(j, b)), c2));
        }
        if (F::is_finite(at(a, b)) &&
            Rational(-2) * f.offset > F::to_rational(at(a, b)))
          set_empty();  // -2c <= m[a][b] must hold
        else if (F::is_finite(at(b, a)) &&
                 Rational(2) * f.offset > F::to_rational(at(b, a)))
          set_empty();  // 2c <= m[b][a] must hold
        if (empty_) return;
        forget_pair(a);
        closed_ = false;
        return;
      }
      case AffineForm::general:
        ensure_closed();
        forget_pair(a);
        return;
    }
  }

  void unconstrain(Variable v) {
    if (v.id() >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "OctShape::unconstrain: variable out of range");
    if (is_empty()) return;
    ensure_closed();
    forget_pair(2 * static_cast<std::size_t>(v.id()));
    // Forgetting both rows and columns of the pair keeps strong closure.
  }

  void add_space_dimensions_and_embed(dim_t extra) {
    grow(extra, /*project=*/false);
  }
  void add_space_dimensions_and_project(dim_t extra) {
    grow(extra, /*project=*/true);
  }

  void remove_higher_space_dimensions(dim_t new_dim) {
    if (new_dim > dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "OctShape::remove_higher_space_dimensions: dimension "
                        "would grow");
    if (new_dim == dim_) return;
    if (!empty_) ensure_closed();
    OctShape r(new_dim);
    r.empty_ = empty_;
    if (!empty_) {
      for (std::size_t i = 0; i < r.k(); ++i)
        for (std::size_t j = 0; j < r.k(); ++j) r.at(i, j) = at(i, j);
      r.closed_ = true;  // projection of a strongly closed matrix
    }
    *this = std::move(r);
  }

  void remove_space_dimensions(const std::set<dim_t>& dims) {
    if (dims.empty()) return;
    if (*dims.rbegin() >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "OctShape::remove_space_dimensions: variable out of "
                        "range");
    std::vector<std::optional<dim_t>> map(dim_);
    dim_t next = 0;
    for (dim_t d = 0; d < dim_; ++d)
      if (!dims.count(d)) map[d] = next++;
    map_space_dimensions(map, next);
  }

  void map_space_dimensions(const std::vector<std::optional<dim_t>>& map,
                            dim_t new_dim) {
    if (map.size() != dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "OctShape::map_space_dimensions: map size differs "
                        "from the space dimension");
    if (!empty_) ensure_closed();
    OctShape r(new_dim);
    r.empty_ = empty_;
    if (!empty_) {
      for (dim_t va = 0; va < dim_; ++va) {
        if (!map[va]) continue;
        if (*map[va] >= new_dim)
          throw DomainError(ErrorKind::dimension_mismatch,
                            "OctShape::map_space_dimensions: image out of "
                            "range");
        for (dim_t vb = 0; vb < dim_; ++vb) {
          if (!map[vb]) continue;
          for (int sa = 0; sa < 2; ++sa)
            for (int sb = 0; sb < 2; ++sb)
              r.at(2 * *map[va] + sa, 2 * *map[vb] + sb) =
                  at(2 * va + sa, 2 * vb + sb);
        }
      }
      r.closed_ = true;  // renamed submatrix of a strongly closed matrix
    }
    *this = std::move(r);
  }

  // Cartesian product with q on fresh trailing dimensions. Sums across the
  // blocks become derivable by strengthening, so the result is not strongly
  // closed as stored.
  void concatenate_assign(const OctShape& q) {
    const dim_t qd = q.dim_;
    OctShape r(dim_ + qd);
    if (empty_ || q.empty_) {
      r.empty_ = true;
    } else {
      for (std::size_t i = 0; i < k(); ++i)
        for (std::size_t j = 0; j < k(); ++j) r.at(i, j) = at(i, j);
      for (std::size_t i = 0; i < q.k(); ++i)
        for (std::size_t j = 0; j < q.k(); ++j)
          r.at(k() + i, k() + j) = q.at(i, j);
      r.closed_ = false;
    }
    *this = std::move(r);
  }

 private:
  dim_t dim_;
  mutable std::vector<Bound> m_;
  mutable bool closed_ = true;  // the all-infinity universe is closed
  mutable bool empty_ = false;

  std::size_t k() const { return 2 * static_cast<std::size_t>(dim_); }
  Bound& at(std::size_t i, std::size_t j) const { return m_[i * k() + j]; }

  void reset_diagonal() {
    for (std::size_t i = 0; i < k(); ++i) at(i, i) = F::zero();
  }

  void check_same_dim(const OctShape& q, const char* who) const {
    if (dim_ != q.dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        std::string(who) + ": operands of different space "
                        "dimensions");
  }

  void set_empty() {
    empty_ = true;
    closed_ = true;
  }

  void ensure_closed() const {
    if (empty_ || closed_) return;
    if (!oct_strong_closure<F>(m_, k()))
      empty_ = true;
    closed_ = true;
  }

  // ---- constraint intake ----

  static std::size_t signed_index(dim_t v, int sign) {
    return 2 * static_cast<std::size_t>(v) + (sign > 0 ? 0 : 1);
  }

  static UnitPattern negated(UnitPattern p) {
    p.sign[0] = -p.sign[0];
    p.sign[1] = -p.sign[1];
    p.bound = -p.bound;
    return p;
  }

  void tighten(std::size_t i, std::size_t j, Bound b) {
    if (F::lt(b, at(i, j))) {
      at(i, j) = std::move(b);
      closed_ = false;
    }
  }

  void tighten_pair(std::size_t i, std::size_t j, Bound b) {
    tighten(j ^ 1, i ^ 1, b);  // coherent twin first; b still intact
    tighten(i, j, std::move(b));
  }

  void tighten_checked(std::size_t i, std::size_t j, Bound b) {
    if (i == j) {
      if (F::lt(b, F::zero())) set_empty();
      return;
    }
    tighten_pair(i, j, std::move(b));
  }

  // sign[0]*var[0] + sign[1]*var[1] <= bound in signed-index form: the sum
  // vhat_a + vhat_b is vhat_b - vhat_{a^1}.
  void apply(const UnitPattern& p) {
    if (p.count == 1) {
      const std::size_t a = signed_index(p.var[0], p.sign[0]);
      tighten(a ^ 1, a, F::from_rational(p.bound + p.bound));
      return;
    }
    const std::size_t a = signed_index(p.var[0], p.sign[0]);
    const std::size_t b = signed_index(p.var[1], p.sign[1]);
    tighten_pair(a ^ 1, b, F::from_rational(p.bound));
  }

  // ---- affine support ----

  struct AffineForm {
    enum Kind { translation, reflection, unit_source, constant, general } kind;
    std::size_t source = 0;  // signed index 2w or 2w+1 for unit_source
    Rational offset;         // c / den
    LinearExpression expr;   // sign-normalized copy for the general case
    Coefficient den;
  };

  AffineForm parse_affine(Variable v, const LinearExpression& e,
                          const Coefficient& den, const char* who) const {
    if (v.id() >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        std::string(who) + ": assigned variable out of range");
    if (e.space_dimension() > dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        std::string(who) + ": expression dimension exceeds "
                        "the shape's");
    if (den.is_zero())
      throw DomainError(ErrorKind::invalid_argument,
                        std::string(who) + ": zero denominator");
    AffineForm f;
    f.expr = e;
    f.den = den;
    if (den.sign() < 0) {
      f.den = -den;
      f.expr = LinearExpression();
      for (dim_t d = 0; d < e.space_dimension(); ++d)
        f.expr.set_coefficient(Variable(d), -e.coefficient(Variable(d)));
      f.expr.set_inhomogeneous_term(-e.inhomogeneous_term());
    }
    f.offset = Rational(f.expr.inhomogeneous_term(), f.den);
    std::size_t nonzero = 0;
    dim_t w = 0;
    for (dim_t d = 0; d < f.expr.space_dimension(); ++d)
      if (!f.expr.coefficient(Variable(d)).is_zero()) {
        ++nonzero;
        w = d;
      }
    if (nonzero == 0) {
      f.kind = AffineForm::constant;
      return f;
    }
    if (nonzero == 1) {
      const Coefficient& cw = f.expr.coefficient(Variable(w));
      const bool plus = cw == f.den;
      const bool minus = -cw == f.den;
      if (plus || minus) {
        if (w == v.id()) {
          f.kind = plus ? AffineForm::translation : AffineForm::reflection;
        } else {
          f.kind = AffineForm::unit_source;
          f.source = signed_index(w, plus ? 1 : -1);
        }
        return f;
      }
    }
    f.kind = AffineForm::general;
    return f;
  }

  // v := v + c on the pair with positive index a: rows and columns shift by
  // the signed offset, the unary slots by twice that; a re-gauge, so closure
  // survives whenever the family applies it exactly.
  void shift_pair(std::size_t a, const Rational& c) {
    const std::size_t b = a + 1;
    for (std::size_t j = 0; j < k(); ++j) {
      if (j == a || j == b) continue;
      at(a, j) = F::add_rational(at(a, j), -c);
      at(b, j) = F::add_rational(at(b, j), c);
      at(j, a) = F::add_rational(at(j, a), c);
      at(j, b) = F::add_rational(at(j, b), -c);
    }
    at(a, b) = F::add_rational(at(a, b), -(c + c));
    at(b, a) = F::add_rational(at(b, a), c + c);
    if constexpr (F::integral) {
      if (!c.is_integer()) closed_ = false;
    }
  }

  // v := -v: swap the pair's rows and columns; an exact re-gauge.
  void swap_pair(std::size_t a) {
    const std::size_t b = a + 1;
    for (std::size_t j = 0; j < k(); ++j) {
      if (j == a || j == b) continue;
      std::swap(at(a, j), at(b, j));
      std::swap(at(j, a), at(j, b));
    }
    std::swap(at(a, b), at(b, a));
  }

  void forget_pair(std::size_t a) {
    const std::size_t b = a + 1;
    for (std::size_t j = 0; j < k(); ++j) {
      if (j == a || j == b) continue;
      at(a, j) = F::infinity();
      at(b, j) = F::infinity();
      at(j, a) = F::infinity();
      at(j, b) = F::infinity();
    }
    at(a, b) = F::infinity();
    at(b, a) = F::infinity();
  }

  EvalInterval box_interval(const LinearExpression& expr,
                            const Coefficient& den) const {
    std::vector<std::optional<Rational>> lo(dim_), hi(dim_);
    for (dim_t d = 0; d < dim_; ++d) {
      const Bound& up = at(2 * d + 1, 2 * d);    // 2*v_d <= up
      const Bound& down = at(2 * d, 2 * d + 1);  // -2*v_d <= down
      if (F::is_finite(up)) hi[d] = F::to_rational(up) / Rational(2);
      if (F::is_finite(down)) lo[d] = -(F::to_rational(down) / Rational(2));
    }
    return evaluate_interval(expr, den, lo, hi);
  }

  void grow(dim_t extra, bool project) {
    if (extra == 0) return;
    OctShape r(dim_ + extra);
    r.empty_ = empty_;
    if (!empty_) {
      for (std::size_t i = 0; i < k(); ++i)
        for (std::size_t j = 0; j < k(); ++j) r.at(i, j) = at(i, j);
      if (project) {
        // New variables equal zero; relations to the old ones are implied
        // and rederived by the next strong closure.
        for (std::size_t t = k(); t < r.k(); t += 2) {
          r.at(t, t + 1) = F::zero();
          r.at(t + 1, t) = F::zero();
        }
        r.closed_ = false;
      } else {
        r.closed_ = closed_;  // all-infinite borders change nothing
      }
    }
    *this = std::move(r);
  }
};

}  // namespace polydom
