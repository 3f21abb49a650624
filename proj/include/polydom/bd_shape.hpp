// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Bounded-difference shapes: conjunctions of constraints of the forms
// x - y <= d and +-x <= d. State is a dense (n+1)x(n+1) matrix over a bound
// family: row and column 0 stand for the constant zero "variable", and
// m[i][j] bounds v_j - v_i, so m[0][j] bounds v_j and m[i][0] bounds -v_i.
//
// The canonical form is the shortest-path closure, computed lazily and
// cached: `closed_` says the matrix is its own closure, `empty_` is
// definitive once set (a negative cycle was found, or emptiness was imposed).
// Queries close; mutators that only tighten entries or re-gauge the matrix
// keep or invalidate the flag as each case warrants. Exceptions thrown while
// closing (budget exhaustion, overflow in the checked family) leave a valid
// matrix for the same set, just not a closed one.

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "polydom/core.hpp"
#include "polydom/dbm.hpp"
#include "polydom/linear_forms.hpp"

namespace polydom {

template <typename F = RationalBounds>
class BdShape {
 public:
  using Family = F;
  using Bound = typename F::Bound;

  // The universe shape: no constraints.
  explicit BdShape(dim_t dim = 0)
      : dim_(dim), m_(square(dim), F::infinity()) {
    reset_diagonal();
  }

  static BdShape universe(dim_t dim) { return BdShape(dim); }
  static BdShape empty(dim_t dim) {
    BdShape s(dim);
    s.empty_ = true;
    return s;
  }

  explicit BdShape(const ConstraintSystem& cs,
                   ShapePolicy policy = ShapePolicy::over_approximate)
      : BdShape(cs.space_dimension()) {
    add_constraints(cs, policy);
  }

  dim_t space_dimension() const { return dim_; }

  bool is_empty() const {
    ensure_closed();
    return empty_;
  }

  bool is_universe() const {
    if (empty_) return false;
    // Any finite off-diagonal entry cuts the space; all-infinite matrices
    // cannot hide a negative cycle, so no closure is needed either way.
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j)
        if (i != j && F::is_finite(at(i, j))) return false;
    return true;
  }

  // Set inclusion: every bound of *this is met by the tightest (closed)
  // corresponding bound of q.
  bool contains(const BdShape& q) const {
    check_same_dim(q, "BdShape::contains");
    if (q.is_empty()) return true;
    if (is_empty()) return false;
    ensure_closed();
    q.ensure_closed();
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (F::lt(m_[i], q.m_[i])) return false;
    return true;
  }

  bool equals(const BdShape& q) const {
    check_same_dim(q, "BdShape::equals");
    if (is_empty()) return q.is_empty();
    if (q.is_empty()) return false;
    ensure_closed();
    q.ensure_closed();
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (!F::eq(m_[i], q.m_[i])) return false;
    return true;
  }
  friend bool operator==(const BdShape& p, const BdShape& q) {
    return p.equals(q);
  }
  friend bool operator!=(const BdShape& p, const BdShape& q) {
    return !p.equals(q);
  }

  bool is_disjoint_from(const BdShape& q) const {
    BdShape t(*this);
    t.intersection_assign(q);
    return t.is_empty();
  }

  // Closed-form entry view: the tightest derivable bound on v_j - v_i, with
  // index 0 denoting the constant zero. Requires a nonempty shape.
  Bound difference_bound(std::size_t i, std::size_t j) const {
    if (i >= n() || j >= n())
      throw DomainError(ErrorKind::dimension_mismatch,
                        "BdShape::difference_bound: index out of range");
    if (is_empty())
      throw DomainError(ErrorKind::invalid_argument,
                        "BdShape::difference_bound: shape is empty");
    return at(i, j);
  }

  // Adds c when it lies in the carrier: a bound on one variable or on a
  // difference of two. Strict inequalities never fit (the shapes are
  // topologically closed). Anything else follows `policy`: dropped, keeping
  // a sound over-approximation of the meet, or rejected.
  void add_constraint(const Constraint& c,
                      ShapePolicy policy = ShapePolicy::over_approximate) {
    if (c.space_dimension() > dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "BdShape::add_constraint: constraint dimension "
                        "exceeds the shape's");
    if (c.is_strict())
      throw DomainError(ErrorKind::topology_mismatch,
                        "BdShape::add_constraint: strict constraint on a "
                        "topologically closed domain");
    if (empty_) return;
    if (c.is_tautology()) return;
    if (c.is_inconsistent()) {
      set_empty();
      return;
    }
    auto pat = unit_pattern(c.expression());
    if (!pat || !representable(*pat)) {
      if (policy == ShapePolicy::reject)
        throw DomainError(ErrorKind::invalid_argument,
                          "BdShape::add_constraint: not a bounded-difference "
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

  // The closed form as integer-coefficient constraints: a finite bound p/q on
  // v_j - v_i leaves as p + q*v_i - q*v_j >= 0, with the i = 0 or j = 0 term
  // dropped. Empty shapes export one inconsistent row, the universe none.
  ConstraintSystem constraints() const {
    ConstraintSystem cs(dim_);
    if (is_empty()) {
      cs.insert(Constraint(LinearExpression::from_terms({}, Coefficient(-1)),
                           RelKind::nonstrict));
      return cs;
    }
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j) {
        if (i == j || !F::is_finite(at(i, j))) continue;
        Rational d = F::to_rational(at(i, j));
        std::vector<std::pair<dim_t, Coefficient>> terms;
        if (i > 0) terms.emplace_back(static_cast<dim_t>(i - 1), d.den());
        if (j > 0) terms.emplace_back(static_cast<dim_t>(j - 1), -d.den());
        cs.insert(Constraint(LinearExpression::from_terms(terms, d.num()),
                             RelKind::nonstrict));
      }
    return cs;
  }

  // Meet: entrywise minimum of the matrices as given; exact.
  void intersection_assign(const BdShape& q) {
    check_same_dim(q, "BdShape::intersection_assign");
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

  // Join: entrywise maximum of the closed forms, the smallest bounded
  // difference shape containing both; maxima of closed matrices stay closed.
  void upper_bound_assign(const BdShape& q) {
    check_same_dim(q, "BdShape::upper_bound_assign");
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

  // Widening. *this is the previous, smaller iterate p (put in closed form
  // here), q the next iterate with p contained in q, taken exactly as
  // given: closing q would re-derive bounds and break the termination
  // guarantee. Entries of q that grew past p's closed entry go to
  // +infinity; stable entries keep p's bound. With tokens, a widening step
  // that would actually lose bounds spends one token and returns q instead.
  void widening_bds_assign(const BdShape& q, unsigned* tokens = nullptr) {
    check_same_dim(q, "BdShape::widening_bds_assign");
    widen_matrix(q, tokens);
  }

  void affine_image(Variable v, const LinearExpression& e,
                    const Coefficient& denominator = Coefficient(1)) {
    AffineForm f = parse_affine(v, e, denominator, "BdShape::affine_image");
    if (is_empty()) return;
    const std::size_t t = v.id() + 1;
    if (f.kind == AffineForm::translation) {
      shift_row_col(t, f.offset);
      return;
    }
    if (f.kind == AffineForm::unit_source) {
      // v := v_w + c with w != v, or v := c (source index 0). Rebuilding the
      // row and column from the source's closed entries keeps the matrix
      // closed; the source's own slot lands at m[t][u] = -c, m[u][t] = +c.
      ensure_closed();
      const std::size_t u = f.source;
      for (std::size_t j = 0; j < n(); ++j) {
        if (j == t) continue;
        at(t, j) = F::add_rational(at(u, j), -f.offset);
        at(j, t) = F::add_rational(at(j, u), f.offset);
      }
      note_inexact_shift(f.offset);
      return;
    }
    // General right-hand side: the best interval for e over the shape's
    // bounding box, then forget v. Sound, and exact on the new unary bounds
    // only; relations between v and other variables are dropped.
    ensure_closed();
    EvalInterval itv = box_interval(f.expr, f.den);
    forget(t);
    if (itv.hi) tighten(0, t, F::from_rational(*itv.hi));
    if (itv.lo) tighten(t, 0, F::from_rational(-*itv.lo));
    closed_ = false;
  }

  void affine_preimage(Variable v, const LinearExpression& e,
                       const Coefficient& denominator = Coefficient(1)) {
    AffineForm f = parse_affine(v, e, denominator, "BdShape::affine_preimage");
    if (is_empty()) return;
    const std::size_t t = v.id() + 1;
    if (f.kind == AffineForm::translation) {
      shift_row_col(t, -f.offset);
      return;
    }
    if (f.kind == AffineForm::unit_source) {
      // Substitute v_w + c (or the constant c, source index 0) for v in every
      // bound involving v, then forget v. A substitution landing on the
      // diagonal is a pure feasibility test.
      ensure_closed();
      const std::size_t u = f.source;
      for (std::size_t j = 0; j < n(); ++j) {
        if (j == t) continue;
        tighten_checked(u, j, F::add_rational(at(t, j), f.offset));
        if (empty_) return;
        tighten_checked(j, u, F::add_rational(at(j, t), -f.offset));
        if (empty_) return;
      }
      forget(t);
      closed_ = false;
      return;
    }
    // General right-hand side: the preimage projects into "v unconstrained".
    ensure_closed();
    forget(t);
  }

  void unconstrain(Variable v) {
    if (v.id() >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "BdShape::unconstrain: variable out of range");
    if (is_empty()) return;
    ensure_closed();
    forget(v.id() + 1);  // forgetting in a closed matrix stays closed
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
                        "BdShape::remove_higher_space_dimensions: dimension "
                        "would grow");
    if (new_dim == dim_) return;
    if (!empty_) ensure_closed();  // projection is a submatrix of the closure
    BdShape r(new_dim);
    r.empty_ = empty_;
    if (!empty_) {
      for (std::size_t i = 0; i < r.n(); ++i)
        for (std::size_t j = 0; j < r.n(); ++j) r.at(i, j) = at(i, j);
      r.closed_ = true;
    }
    *this = std::move(r);
  }

  void remove_space_dimensions(const std::set<dim_t>& dims) {
    if (dims.empty()) return;
    if (*dims.rbegin() >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "BdShape::remove_space_dimensions: variable out of "
                        "range");
    std::vector<std::optional<dim_t>> map(dim_);
    dim_t next = 0;
    for (dim_t d = 0; d < dim_; ++d)
      if (!dims.count(d)) map[d] = next++;
    map_space_dimensions(map, next);
  }

  // Partial injective map old dim -> new dim; unmapped old dimensions are
  // projected away, new dimensions without a preimage are unconstrained.
  void map_space_dimensions(const std::vector<std::optional<dim_t>>& map,
                            dim_t new_dim) {
    if (map.size() != dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "BdShape::map_space_dimensions: map size differs "
                        "from the space dimension");
    if (!empty_) ensure_closed();
    BdShape r(new_dim);
    r.empty_ = empty_;
    if (!empty_) {
      for (dim_t a = 0; a < dim_; ++a) {
        if (!map[a]) continue;
        if (*map[a] >= new_dim)
          throw DomainError(ErrorKind::dimension_mismatch,
                            "BdShape::map_space_dimensions: image out of "
                            "range");
        r.at(0, *map[a] + 1) = at(0, a + 1);
        r.at(*map[a] + 1, 0) = at(a + 1, 0);
        for (dim_t b = 0; b < dim_; ++b)
          if (map[b] && b != a) r.at(*map[a] + 1, *map[b] + 1) = at(a + 1, b + 1);
      }
      r.closed_ = true;  // renamed submatrix of a closed matrix
    }
    *this = std::move(r);
  }

  // Cartesian product with q on fresh trailing dimensions. Unary rows of
  // both operands share matrix row 0, so cross differences become derivable
  // and the result is not closed as stored.
  void concatenate_assign(const BdShape& q) {
    const dim_t qd = q.dim_;
    BdShape r(dim_ + qd);
    if (empty_ || q.empty_) {
      r.empty_ = true;
    } else {
      for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j = 0; j < n(); ++j) r.at(i, j) = at(i, j);
      for (std::size_t i = 0; i < q.n(); ++i)
        for (std::size_t j = 0; j < q.n(); ++j) {
          if (i == 0 && j == 0) continue;
          r.at(i == 0 ? 0 : dim_ + i, j == 0 ? 0 : dim_ + j) = q.at(i, j);
        }
      r.closed_ = false;
    }
    *this = std::move(r);
  }

 private:
  dim_t dim_;
  mutable std::vector<Bound> m_;
  // `empty_` is definitive when set. `closed_` says m_ is its own closure;
  // when both are false the status is unknown until the next closure.
  mutable bool closed_ = true;  // the all-infinity universe is closed
  mutable bool empty_ = false;

  static std::size_t square(dim_t dim) {
    const std::size_t k = static_cast<std::size_t>(dim) + 1;
    return k * k;
  }
  std::size_t n() const { return static_cast<std::size_t>(dim_) + 1; }
  Bound& at(std::size_t i, std::size_t j) const { return m_[i * n() + j]; }

  void reset_diagonal() {
    for (std::size_t i = 0; i < n(); ++i) at(i, i) = F::zero();
  }

  void check_same_dim(const BdShape& q, const char* who) const {
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
    if (!shortest_path_closure<F>(m_, n()))
      empty_ = true;
    closed_ = true;
  }

  // ---- constraint intake ----

  static bool representable(const UnitPattern& p) {
    return p.count == 1 || p.sign[0] * p.sign[1] < 0;
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

  // Like tighten, but a diagonal target is a feasibility test: v - v <= b.
  void tighten_checked(std::size_t i, std::size_t j, Bound b) {
    if (i == j) {
      if (F::lt(b, F::zero())) set_empty();
      return;
    }
    tighten(i, j, std::move(b));
  }

  void apply(const UnitPattern& p) {
    if (p.count == 1) {
      const std::size_t t = p.var[0] + 1;
      if (p.sign[0] > 0)
        tighten(0, t, F::from_rational(p.bound));  // v <= bound
      else
        tighten(t, 0, F::from_rational(p.bound));  // -v <= bound
      return;
    }
    const std::size_t pos = p.sign[0] > 0 ? 0 : 1;  // v_pos - v_neg <= bound
    const std::size_t i = p.var[1 - pos] + 1;
    const std::size_t j = p.var[pos] + 1;
    tighten_checked(i, j, F::from_rational(p.bound));
  }

  // ---- affine support ----

  struct AffineForm {
    enum Kind { translation, unit_source, general } kind;
    std::size_t source = 0;  // matrix index: w + 1, or 0 for a constant
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
    if (den.sign() < 0) {  // normalize so the denominator is positive
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
      f.kind = AffineForm::unit_source;
      f.source = 0;
      return f;
    }
    if (nonzero == 1 && f.expr.coefficient(Variable(w)) == f.den) {
      if (w == v.id()) {
        f.kind = AffineForm::translation;
      } else {
        f.kind = AffineForm::unit_source;
        f.source = static_cast<std::size_t>(w) + 1;
      }
      return f;
    }
    f.kind = AffineForm::general;
    return f;
  }

  // v := v + c: a re-gauge of one coordinate. Bounds v_j - v shrink by c,
  // bounds v - v_j grow by c; closure status is unaffected for exact shifts.
  void shift_row_col(std::size_t t, const Rational& c) {
    for (std::size_t j = 0; j < n(); ++j) {
      if (j == t) continue;
      at(t, j) = F::add_rational(at(t, j), -c);
      at(j, t) = F::add_rational(at(j, t), c);
    }
    note_inexact_shift(c);
  }

  // The integral family rounds fractional shifts entry by entry, which
  // breaks the re-gauge argument that closure is preserved.
  void note_inexact_shift(const Rational& c) {
    if constexpr (F::integral) {
      if (!c.is_integer()) closed_ = false;
    } else {
      (void)c;
    }
  }

  void forget(std::size_t t) {
    for (std::size_t j = 0; j < n(); ++j) {
      if (j == t) continue;
      at(t, j) = F::infinity();
      at(j, t) = F::infinity();
    }
  }

  // Per-variable bounds of the closed matrix as rational intervals, then the
  // interval of expr/den over that box.
  EvalInterval box_interval(const LinearExpression& expr,
                            const Coefficient& den) const {
    std::vector<std::optional<Rational>> lo(dim_), hi(dim_);
    for (dim_t d = 0; d < dim_; ++d) {
      if (F::is_finite(at(0, d + 1))) hi[d] = F::to_rational(at(0, d + 1));
      if (F::is_finite(at(d + 1, 0))) lo[d] = -F::to_rational(at(d + 1, 0));
    }
    return evaluate_interval(expr, den, lo, hi);
  }

  void grow(dim_t extra, bool project) {
    if (extra == 0) return;
    BdShape r(dim_ + extra);
    r.empty_ = empty_;
    if (!empty_) {
      for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j = 0; j < n(); ++j) r.at(i, j) = at(i, j);
      if (project) {
        // New variables equal zero: tie them to row 0 and mirror row 0's
        // relations so a closed matrix stays closed.
        for (std::size_t t = n(); t < r.n(); ++t) {
          for (std::size_t j = 0; j < r.n(); ++j) {
            if (j == t) continue;
            r.at(t, j) = j < n() ? at(0, j) : F::zero();
            r.at(j, t) = j < n() ? at(j, 0) : F::zero();
          }
        }
      }
      r.closed_ = closed_;
    }
    *this = std::move(r);
  }

  // Shared by the public widening; builds the candidate in place.
  void widen_matrix(const BdShape& q, unsigned* tokens) {
    if (is_empty()) {
      *this = q;
      return;
    }
    ensure_closed();
    BdShape cand(*this);
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (!F::le(q.m_[i], cand.m_[i])) cand.m_[i] = F::infinity();
    cand.reset_diagonal();
    cand.closed_ = false;
    if (tokens && *tokens > 0) {
      // Spend a token instead of widening when the candidate would really
      // grow past q. Testing candidate == q needs only the candidate's
      // closure: q's own raw rows are exactly its constraints.
      BdShape probe(cand);
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
};

}  // namespace polydom
