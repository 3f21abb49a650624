// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Double description machinery and the polyhedron operations built on it.
//
// Internal row layout: column 0 is the homogenizing coordinate (inhomogeneous
// term on the constraint side, divisor on the generator side), columns
// 1..dim are the space dimensions, and NNC polyhedra keep one extra epsilon
// column last. Constraint systems always define cones inside xi >= 0 (closed
// case: an explicit positivity row; NNC case: 0 <= eps <= xi rows), so every
// generator row either has xi > 0 (a point of the cone's xi = 1 slice) or
// xi = 0 (a direction).

#include "polydom/polyhedron.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <new>
#include <sstream>
#include <utility>

namespace polydom {
namespace {

Coefficient row_dot(const dd::Row& x, const dd::Row& y) {
  assert(x.a.size() == y.a.size());
  Coefficient s(0);
  for (std::size_t i = 0; i < x.a.size(); ++i)
    if (!x.a[i].is_zero() && !y.a[i].is_zero()) s += x.a[i] * y.a[i];
  return s;
}

// Divides out the coefficient gcd; lines get a canonical sign as well.
// Returns false for the all-zero row.
bool normalize_row(dd::Row& r) {
  Coefficient g(0);
  for (const auto& c : r.a) g = Coefficient::gcd(g, c);
  if (g.is_zero()) return false;
  if (!g.is_one())
    for (auto& c : r.a) c = Coefficient::div_exact(c, g);
  if (r.line) {
    for (const auto& c : r.a) {
      if (c.is_zero()) continue;
      if (c.sign() < 0)
        for (auto& d : r.a) d = -d;
      break;
    }
  }
  return true;
}

// cx*x + cy*y, gcd-normalized. Rays require cx > 0 so orientation survives.
dd::Row combine_rows(const dd::Row& x, const dd::Row& y, const Coefficient& cx,
                     const Coefficient& cy, bool line) {
  dd::Row r;
  r.line = line;
  r.a.resize(x.a.size());
  for (std::size_t i = 0; i < x.a.size(); ++i)
    r.a[i] = cx * x.a[i] + cy * y.a[i];
  bool nonzero = normalize_row(r);
  assert(nonzero);
  (void)nonzero;
  return r;
}

}  // namespace

namespace dd {

void BitRow::resize(std::size_t n) {
  n_ = n;
  w_.assign((n + 63) / 64, 0);
}

bool BitRow::test(std::size_t i) const {
  assert(i < n_);
  return (w_[i >> 6] >> (i & 63)) & 1u;
}

void BitRow::set(std::size_t i) {
  assert(i < n_);
  w_[i >> 6] |= std::uint64_t(1) << (i & 63);
}

void BitRow::append(bool b) {
  if ((n_ & 63) == 0) w_.push_back(0);
  if (b) w_.back() |= std::uint64_t(1) << (n_ & 63);
  ++n_;
}

std::size_t BitRow::count() const {
  std::size_t c = 0;
  for (std::uint64_t w : w_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

BitRow BitRow::ones(std::size_t n) {
  BitRow r;
  r.n_ = n;
  r.w_.assign((n + 63) / 64, ~std::uint64_t(0));
  if (n & 63) r.w_.back() = ~std::uint64_t(0) >> (64 - (n & 63));
  return r;
}

BitRow operator&(const BitRow& a, const BitRow& b) {
  assert(a.n_ == b.n_);
  BitRow r;
  r.n_ = a.n_;
  r.w_.resize(a.w_.size());
  for (std::size_t i = 0; i < a.w_.size(); ++i) r.w_[i] = a.w_[i] & b.w_[i];
  return r;
}

bool BitRow::is_subset_of(const BitRow& b) const {
  assert(n_ == b.n_);
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (w_[i] & ~b.w_[i]) return false;
  return true;
}

bool operator==(const BitRow& a, const BitRow& b) {
  return a.n_ == b.n_ && a.w_ == b.w_;
}

bool conversion(const Rows& source, std::size_t start, Rows& dest,
                SatMatrix& sat, bool nnc, bool detect_empty) {
  assert(dest.size() == sat.size());
  if (dest.empty()) return !detect_empty;
  const std::size_t h = dest[0].a.size();
  for (std::size_t j = start; j < source.size(); ++j) {
    budget_checkpoint();
    const Row& c = source[j];
    assert(c.a.size() == h);
    const std::size_t n_rows = dest.size();
    std::vector<Coefficient> prod(n_rows);
    std::vector<int> sg(n_rows);
    std::size_t lambda = n_rows;
    std::size_t num_lines = 0;
    for (std::size_t i = 0; i < n_rows; ++i) {
      prod[i] = row_dot(dest[i], c);
      sg[i] = prod[i].sign();
      if (dest[i].line) {
        ++num_lines;
        if (sg[i] != 0 && lambda == n_rows) lambda = i;
      }
    }
    if (lambda != n_rows) {
      // A line crosses the hyperplane of c: the lineality space shrinks by
      // one. Re-aim every other nonsaturating row with that line; the line
      // itself dies (equality) or becomes the oriented escape ray.
      const Row lrow = dest[lambda];
      const Coefficient sl = prod[lambda];
      const Coefficient asl = sl.abs();
      const Coefficient sgn_sl(sl.sign());
      for (std::size_t i = 0; i < n_rows; ++i) {
        if (i == lambda || sg[i] == 0) continue;
        if (dest[i].line)
          dest[i] = combine_rows(dest[i], lrow, sl, -prod[i], true);
        else
          dest[i] = combine_rows(dest[i], lrow, asl, -(sgn_sl * prod[i]), false);
      }
      if (c.line) {
        dest.erase(dest.begin() + static_cast<std::ptrdiff_t>(lambda));
        sat.erase(sat.begin() + static_cast<std::ptrdiff_t>(lambda));
        for (auto& row : sat) row.append(true);
      } else {
        Row& lam = dest[lambda];
        if (sl.sign() < 0)
          for (auto& v : lam.a) v = -v;
        lam.line = false;
        sat[lambda] = BitRow::ones(j);  // as a line it saturated everything
        for (std::size_t i = 0; i < n_rows; ++i) sat[i].append(i != lambda);
      }
    } else {
      // Every line saturates c; split the rays by the sign of their product.
      std::vector<std::size_t> pos, neg;
      for (std::size_t i = 0; i < n_rows; ++i) {
        if (dest[i].line) continue;
        if (sg[i] > 0)
          pos.push_back(i);
        else if (sg[i] < 0)
          neg.push_back(i);
      }
      if (!c.line && neg.empty()) {
        for (std::size_t i = 0; i < n_rows; ++i) sat[i].append(sg[i] == 0);
      } else {
        // Adjacent pairs across the hyperplane meet it in new extreme rays.
        Rows created;
        SatMatrix created_sat;
        for (std::size_t p : pos) {
          for (std::size_t n : neg) {
            budget_checkpoint();
            BitRow common = sat[p] & sat[n];
            // An adjacent pair shares saturators of rank h - num_lines - 2;
            // fewer set bits cannot reach that rank.
            if (common.count() + 2 < h - num_lines) continue;
            bool adjacent = true;
            for (std::size_t r = 0; r < n_rows && adjacent; ++r) {
              if (r == p || r == n || dest[r].line) continue;
              if (common.is_subset_of(sat[r])) adjacent = false;
            }
            if (!adjacent) continue;
            created.push_back(
                combine_rows(dest[n], dest[p], prod[p], -prod[n], false));
            common.append(true);
            created_sat.push_back(std::move(common));
          }
        }
        Rows next;
        SatMatrix next_sat;
        next.reserve(n_rows + created.size());
        next_sat.reserve(n_rows + created.size());
        for (std::size_t i = 0; i < n_rows; ++i) {
          bool keep = dest[i].line || sg[i] == 0 || (!c.line && sg[i] > 0);
          if (!keep) continue;
          sat[i].append(sg[i] == 0);
          next.push_back(std::move(dest[i]));
          next_sat.push_back(std::move(sat[i]));
        }
        for (std::size_t k = 0; k < created.size(); ++k) {
          next.push_back(std::move(created[k]));
          next_sat.push_back(std::move(created_sat[k]));
        }
        dest = std::move(next);
        sat = std::move(next_sat);
      }
    }
    if (detect_empty) {
      bool can_have_point = false;
      for (const Row& r : dest) {
        if (r.line ? !r.a[0].is_zero()
                   : (r.a[0].sign() > 0 && (!nnc || r.a[h - 1].sign() > 0))) {
          can_have_point = true;
          break;
        }
      }
      if (!can_have_point) return false;
    }
  }
  return true;
}

void simplify(Rows& source, Rows& dest, SatMatrix& sat) {
  assert(sat.size() == dest.size());
  const std::size_t m = source.size();
  if (m == 0) return;
  const std::size_t h = source[0].a.size();

  // Column-major saturation over the non-line dest rows.
  std::vector<std::size_t> rays;
  for (std::size_t i = 0; i < dest.size(); ++i)
    if (!dest[i].line) rays.push_back(i);
  const std::size_t nr = rays.size();
  std::vector<BitRow> col(m);
  for (std::size_t j = 0; j < m; ++j) col[j].resize(nr);
  for (std::size_t k = 0; k < nr; ++k)
    for (std::size_t j = 0; j < m; ++j)
      if (sat[rays[k]].test(j)) col[j].set(k);

  // A row saturated by every generator holds with equality on the whole
  // cone (lines saturate by invariant).
  for (std::size_t j = 0; j < m; ++j)
    if (!source[j].line && col[j].count() == nr) source[j].line = true;

  std::vector<bool> drop(m, false);

  // Equality part: exact Gaussian elimination to an echelon basis.
  Rows echelon;
  for (std::size_t j = 0; j < m; ++j) {
    if (!source[j].line) continue;
    Row r = source[j];
    for (const Row& e : echelon) {
      std::size_t pc = 0;
      while (e.a[pc].is_zero()) ++pc;
      if (r.a[pc].is_zero()) continue;
      Row combined;
      combined.line = true;
      combined.a.resize(h);
      for (std::size_t i = 0; i < h; ++i)
        combined.a[i] = e.a[pc] * r.a[i] - r.a[pc] * e.a[i];
      r = std::move(combined);
    }
    if (normalize_row(r)) echelon.push_back(std::move(r));
    drop[j] = true;  // replaced by the echelon basis
  }
  std::sort(echelon.begin(), echelon.end(), [](const Row& a, const Row& b) {
    std::size_t pa = 0, pb = 0;
    while (a.a[pa].is_zero()) ++pa;
    while (b.a[pb].is_zero()) ++pb;
    return pa < pb;
  });

  // Inequalities: reduce modulo the equalities, drop tautologies, then drop
  // any row whose saturators are included in another's (it cuts a face of a
  // facet, not a facet).
  std::vector<std::size_t> ineqs;
  for (std::size_t j = 0; j < m; ++j) {
    if (drop[j]) continue;
    Row& r = source[j];
    for (const Row& e : echelon) {
      std::size_t pc = 0;
      while (e.a[pc].is_zero()) ++pc;
      if (r.a[pc].is_zero()) continue;
      // e's pivot is positive after normalization, so scaling by it keeps
      // the inequality's orientation.
      Row combined;
      combined.line = false;
      combined.a.resize(h);
      for (std::size_t i = 0; i < h; ++i)
        combined.a[i] = e.a[pc] * r.a[i] - r.a[pc] * e.a[i];
      r = std::move(combined);
    }
    if (!normalize_row(r)) {
      drop[j] = true;  // reduced to 0 >= 0
      continue;
    }
    ineqs.push_back(j);
  }
  for (std::size_t x : ineqs) {
    if (drop[x]) continue;
    for (std::size_t y : ineqs) {
      if (x == y || drop[y]) continue;
      if (!col[y].is_subset_of(col[x])) continue;
      if (col[x].is_subset_of(col[y]) && x > y) continue;  // equal: keep first
      drop[y] = true;
    }
  }

  // Rebuild the system (equalities first) and re-derive the saturation
  // columns; gaussian steps never change saturation because every kept
  // generator saturates every equality.
  Rows next;
  std::vector<std::size_t> kept_cols;
  for (Row& e : echelon) next.push_back(std::move(e));
  for (std::size_t j : ineqs) {
    if (drop[j]) continue;
    kept_cols.push_back(j);
    next.push_back(std::move(source[j]));
  }
  for (std::size_t i = 0; i < dest.size(); ++i) {
    BitRow nb;
    for (std::size_t e = 0; e < echelon.size(); ++e) nb.append(true);
    for (std::size_t j : kept_cols) nb.append(dest[i].line || sat[i].test(j));
    sat[i] = std::move(nb);
  }
  source = std::move(next);
}

}  // namespace dd

namespace {

dd::SatMatrix transpose_sat(const dd::SatMatrix& m, std::size_t cols) {
  dd::SatMatrix t(cols);
  for (auto& row : t) row.resize(m.size());
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (m[r].test(c)) t[c].set(r);
  return t;
}

dd::Rows identity_rows(dim_t h, bool as_lines) {
  dd::Rows rows;
  rows.reserve(h);
  for (dim_t i = 0; i < h; ++i) {
    dd::Row r;
    r.line = as_lines;
    r.a.assign(h, Coefficient(0));
    r.a[i] = Coefficient(1);
    rows.push_back(std::move(r));
  }
  return rows;
}

[[noreturn]] void rethrow_oom() {
  throw DomainError(ErrorKind::out_of_memory,
                    "memory exhausted during conversion");
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction and state transitions

Polyhedron::Polyhedron(dim_t dim, Topology t) : topology_(t), dim_(dim) {
  init_universe_constraints();
  con_valid_ = true;
  empty_known_ = true;
  empty_ = false;
}

Polyhedron Polyhedron::universe(dim_t dim, Topology t) {
  return Polyhedron(dim, t);
}

Polyhedron Polyhedron::empty(dim_t dim, Topology t) {
  Polyhedron p(dim, t);
  p.set_empty();
  return p;
}

Polyhedron::Polyhedron(const ConstraintSystem& cs, Topology t)
    : Polyhedron(cs.space_dimension(), t) {
  add_constraints(cs);
}

Polyhedron::Polyhedron(const GeneratorSystem& gs, Topology t)
    : topology_(t), dim_(gs.space_dimension()) {
  if (!gs.has_points()) {
    if (gs.size() != 0)
      throw DomainError(ErrorKind::invalid_argument,
                        "a non-empty generator system needs at least one point");
    set_empty();
    return;
  }
  for (const Generator& g : gs)
    for (dd::Row& r : rows_from_generator(g)) gen_.push_back(std::move(r));
  gen_valid_ = true;
  empty_known_ = true;
  empty_ = false;
}

void Polyhedron::init_universe_constraints() {
  con_.clear();
  const dim_t h = h_dim();
  if (is_nnc()) {
    dd::Row eps_lo;  // eps >= 0
    eps_lo.a.assign(h, Coefficient(0));
    eps_lo.a[h - 1] = Coefficient(1);
    con_.push_back(std::move(eps_lo));
    dd::Row eps_hi;  // xi - eps >= 0
    eps_hi.a.assign(h, Coefficient(0));
    eps_hi.a[0] = Coefficient(1);
    eps_hi.a[h - 1] = Coefficient(-1);
    con_.push_back(std::move(eps_hi));
  } else {
    dd::Row pos;  // xi >= 0
    pos.a.assign(h, Coefficient(0));
    pos.a[0] = Coefficient(1);
    con_.push_back(std::move(pos));
  }
}

void Polyhedron::set_empty() const {
  con_.clear();
  dd::Row marker;  // -xi >= 0: unsatisfiable together with positivity
  marker.a.assign(h_dim(), Coefficient(0));
  marker.a[0] = Coefficient(-1);
  con_.push_back(std::move(marker));
  gen_.clear();
  sat_.clear();
  con_valid_ = true;
  gen_valid_ = false;
  sat_valid_ = false;
  minimized_ = true;
  empty_ = true;
  empty_known_ = true;
}

void Polyhedron::ensure_generators() const {
  if (empty_known_ && empty_) return;
  if (gen_valid_) {
    empty_known_ = true;
    empty_ = false;
    return;
  }
  assert(con_valid_);
  try {
    dd::Rows dest = identity_rows(h_dim(), true);
    dd::SatMatrix sat(dest.size());
    if (!dd::conversion(con_, 0, dest, sat, is_nnc(), true)) {
      set_empty();
      return;
    }
    gen_ = std::move(dest);
    sat_ = std::move(sat);
    gen_valid_ = sat_valid_ = true;
    empty_known_ = true;
    empty_ = false;
  } catch (const std::bad_alloc&) {
    rethrow_oom();
  }
}

void Polyhedron::ensure_constraints() const {
  if (empty_known_ && empty_) return;
  if (con_valid_) return;
  assert(gen_valid_);
  try {
    dd::Rows dest = identity_rows(h_dim(), true);
    dd::SatMatrix satc(dest.size());
    dd::conversion(gen_, 0, dest, satc, is_nnc(), false);
    dd::Rows gens = gen_;
    dd::simplify(gens, dest, satc);  // drops redundant generator rows
    con_ = std::move(dest);
    gen_ = std::move(gens);
    sat_ = transpose_sat(satc, gen_.size());
    con_valid_ = sat_valid_ = true;
    empty_known_ = true;
    empty_ = false;
  } catch (const std::bad_alloc&) {
    rethrow_oom();
  }
}

void Polyhedron::minimize() const {
  if ((empty_known_ && empty_) || minimized_) return;
  if (!(con_valid_ && gen_valid_ && sat_valid_)) {
    if (con_valid_) {
      gen_valid_ = sat_valid_ = false;
      ensure_generators();
      if (empty_) return;
    } else {
      ensure_constraints();
    }
  }
  try {
    dd::Rows cons = con_;
    dd::SatMatrix sat = sat_;
    dd::simplify(cons, gen_, sat);  // gen rows are read, never written
    con_ = std::move(cons);
    sat_ = std::move(sat);
  } catch (const std::bad_alloc&) {
    rethrow_oom();
  }
  minimized_ = true;
}

// ---------------------------------------------------------------------------
// Row translation between user vocabulary and internal homogeneous form

dd::Row Polyhedron::row_from_constraint(const Constraint& c) const {
  if (c.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "constraint dimension exceeds the polyhedron's");
  if (c.is_strict() && !is_nnc())
    throw DomainError(ErrorKind::topology_mismatch,
                      "strict inequality on a topologically closed polyhedron");
  dd::Row r;
  r.line = c.is_equality();
  r.a.assign(h_dim(), Coefficient(0));
  r.a[0] = c.inhomogeneous_term();
  for (dim_t d = 0; d < c.space_dimension(); ++d)
    r.a[1 + d] = c.coefficient(Variable(d));
  if (c.is_strict()) r.a[h_dim() - 1] = Coefficient(-1);
  return r;
}

Constraint Polyhedron::constraint_from_row(const dd::Row& r) const {
  LinearExpression e;
  e.extend_to(dim_);
  for (dim_t d = 0; d < dim_; ++d) e.set_coefficient(Variable(d), r.a[1 + d]);
  e.set_inhomogeneous_term(r.a[0]);
  RelKind k = RelKind::nonstrict;
  if (r.line)
    k = RelKind::equal;
  else if (is_nnc() && r.a[h_dim() - 1].sign() < 0)
    k = RelKind::strict;
  return Constraint(std::move(e), k);
}

std::vector<dd::Row> Polyhedron::rows_from_generator(const Generator& g) const {
  if (g.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "generator dimension exceeds the polyhedron's");
  if (g.kind() == GenKind::closure_point && !is_nnc())
    throw DomainError(ErrorKind::topology_mismatch,
                      "closure point on a topologically closed polyhedron");
  const dim_t h = h_dim();
  dd::Row r;
  r.a.assign(h, Coefficient(0));
  for (dim_t d = 0; d < g.space_dimension(); ++d)
    r.a[1 + d] = g.coefficient(Variable(d));
  std::vector<dd::Row> out;
  switch (g.kind()) {
    case GenKind::line:
      r.line = true;
      out.push_back(std::move(r));
      break;
    case GenKind::ray:
      out.push_back(std::move(r));
      break;
    case GenKind::closure_point:
      r.a[0] = g.divisor();
      out.push_back(std::move(r));
      break;
    case GenKind::point:
      r.a[0] = g.divisor();
      if (is_nnc()) {
        dd::Row closure_copy = r;  // the same coordinates at eps = 0
        r.a[h - 1] = g.divisor();
        out.push_back(std::move(r));
        out.push_back(std::move(closure_copy));
      } else {
        out.push_back(std::move(r));
      }
      break;
  }
  for (dd::Row& o : out) {
    bool nonzero = normalize_row(o);
    (void)nonzero;
    assert(nonzero);
  }
  return out;
}

Generator Polyhedron::generator_from_row(const dd::Row& r) const {
  LinearExpression e;
  e.extend_to(dim_);
  for (dim_t d = 0; d < dim_; ++d) e.set_coefficient(Variable(d), r.a[1 + d]);
  if (r.line) {
    assert(r.a[0].is_zero());
    return Generator::line(e);
  }
  const Coefficient& xi = r.a[0];
  if (xi.is_zero()) return Generator::ray(e);
  assert(xi.sign() > 0);
  if (is_nnc() && r.a[h_dim() - 1].is_zero()) return Generator::closure_point(e, xi);
  return Generator::point(e, xi);
}

bool Polyhedron::row_is_scaffolding(const dd::Row& r) const {
  if (r.line) return false;
  for (dim_t d = 0; d < dim_; ++d)
    if (!r.a[1 + d].is_zero()) return false;
  return true;
}

ConstraintSystem Polyhedron::user_constraints_raw() const {
  assert(con_valid_);
  ConstraintSystem cs(dim_);
  for (const dd::Row& r : con_) {
    bool homo_zero = true;
    for (dim_t d = 0; d < dim_ && homo_zero; ++d)
      if (!r.a[1 + d].is_zero()) homo_zero = false;
    if (homo_zero) continue;  // scaffolding rows and tautologies
    cs.insert(constraint_from_row(r));
  }
  return cs;
}

GeneratorSystem Polyhedron::user_generators_raw() const {
  assert(gen_valid_);
  GeneratorSystem gs(dim_);
  for (const dd::Row& r : gen_) gs.insert(generator_from_row(r));
  return gs;
}

// ---------------------------------------------------------------------------
// Predicates

bool Polyhedron::is_empty() const {
  if (!empty_known_) ensure_generators();
  return empty_;
}

bool Polyhedron::is_universe() const {
  if (is_empty()) return false;
  minimize();
  return user_constraints_raw().size() == 0;
}

bool Polyhedron::is_bounded() const {
  if (is_empty()) return true;
  ensure_generators();
  for (const dd::Row& r : gen_)
    if (r.a[0].is_zero()) return false;
  return true;
}

bool Polyhedron::is_topologically_closed() const {
  if (!is_nnc() || is_empty()) return true;
  Polyhedron cl = *this;
  cl.topological_closure_assign();
  return equals(cl);
}

dim_t Polyhedron::affine_dim() const {
  if (is_empty()) return 0;
  minimize();
  dim_t eqs = 0;
  for (const dd::Row& r : con_)
    if (r.line) ++eqs;
  assert(eqs <= dim_);
  return dim_ - eqs;
}

void Polyhedron::check_binary_compat(const Polyhedron& q, const char* op) const {
  if (topology_ != q.topology_)
    throw DomainError(ErrorKind::topology_mismatch,
                      std::string(op) + ": topologies differ");
  if (dim_ != q.dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      std::string(op) + ": space dimensions differ");
}

bool Polyhedron::system_entails(const GeneratorSystem& gs, const Constraint& c) {
  for (const Generator& g : gs) {
    SatResult s = satisfies(g, c);
    switch (c.kind()) {
      case RelKind::equal:
        if (s != SatResult::saturates) return false;
        break;
      case RelKind::nonstrict:
        if (g.kind() == GenKind::line) {
          if (s != SatResult::saturates) return false;
        } else if (s == SatResult::violates) {
          return false;
        }
        break;
      case RelKind::strict:
        if (g.kind() == GenKind::line) {
          if (s != SatResult::saturates) return false;
        } else if (g.kind() == GenKind::point) {
          if (s != SatResult::satisfies) return false;
        } else if (s == SatResult::violates) {
          return false;  // rays and closure points need >= 0 only
        }
        break;
    }
  }
  return true;
}

bool Polyhedron::contains(const Polyhedron& q) const {
  check_binary_compat(q, "contains");
  if (q.is_empty()) return true;
  if (is_empty()) return false;
  ensure_constraints();
  q.ensure_generators();
  ConstraintSystem cs = user_constraints_raw();
  GeneratorSystem gs = q.user_generators_raw();
  for (const Constraint& c : cs)
    if (!system_entails(gs, c)) return false;
  return true;
}

bool Polyhedron::strictly_contains(const Polyhedron& q) const {
  return contains(q) && !q.contains(*this);
}

bool Polyhedron::equals(const Polyhedron& q) const {
  return contains(q) && q.contains(*this);
}

bool Polyhedron::is_disjoint_from(const Polyhedron& q) const {
  Polyhedron t = *this;
  t.intersection_assign(q);
  return t.is_empty();
}

Extremum Polyhedron::maximize(const LinearExpression& e) const {
  if (e.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "expression dimension exceeds the polyhedron's");
  Extremum out;
  if (is_empty()) return out;
  ensure_generators();
  dd::Row er;
  er.a.assign(h_dim(), Coefficient(0));
  er.a[0] = e.inhomogeneous_term();
  for (dim_t d = 0; d < e.space_dimension(); ++d)
    er.a[1 + d] = e.coefficient(Variable(d));
  bool have = false;
  Rational best;
  bool attained = false;
  for (const dd::Row& r : gen_) {
    Coefficient p = row_dot(er, r);
    if (r.line) {
      if (!p.is_zero()) return out;  // unbounded along a line
      continue;
    }
    if (r.a[0].is_zero()) {
      if (p.sign() > 0) return out;  // unbounded along a ray
      continue;
    }
    Rational value(p, r.a[0]);
    bool row_attains = !is_nnc() || r.a[h_dim() - 1].sign() > 0;
    if (!have || value > best) {
      best = value;
      attained = row_attains;
      have = true;
    } else if (value == best && row_attains) {
      attained = true;
    }
  }
  assert(have);
  out.bounded = true;
  out.value = std::move(best);
  out.attained = attained;
  return out;
}

Extremum Polyhedron::minimize(const LinearExpression& e) const {
  Extremum r = maximize(-e);
  if (r.bounded) r.value = -r.value;
  return r;
}

ConstraintRelation Polyhedron::relation_with(const Constraint& c) const {
  if (c.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "constraint dimension exceeds the polyhedron's");
  ConstraintRelation rel;
  if (is_empty()) {
    rel.is_included = rel.saturates = rel.is_disjoint = true;
    return rel;
  }
  Extremum hi = maximize(c.expression());
  Extremum lo = minimize(c.expression());
  const bool lo_zero = lo.bounded && lo.value.is_zero();
  const bool hi_zero = hi.bounded && hi.value.is_zero();
  rel.saturates = lo_zero && hi_zero;
  switch (c.kind()) {
    case RelKind::equal:
      rel.is_included = rel.saturates;
      rel.is_disjoint =
          !((!lo.bounded || lo.value.sign() < 0 || (lo_zero && lo.attained)) &&
            (!hi.bounded || hi.value.sign() > 0 || (hi_zero && hi.attained)));
      break;
    case RelKind::nonstrict:
      rel.is_included = lo.bounded && lo.value.sign() >= 0;
      rel.is_disjoint = hi.bounded && (hi.value.sign() < 0 ||
                                       (hi_zero && !hi.attained));
      break;
    case RelKind::strict:
      rel.is_included =
          lo.bounded && (lo.value.sign() > 0 || (lo_zero && !lo.attained));
      rel.is_disjoint = hi.bounded && hi.value.sign() <= 0;
      break;
  }
  rel.strictly_intersects = !rel.is_included && !rel.is_disjoint;
  return rel;
}

bool Polyhedron::subsumes(const Generator& g) const {
  if (is_empty()) return false;
  Polyhedron w = *this;
  w.add_generator(g);
  return equals(w);
}

// ---------------------------------------------------------------------------
// Minimized user descriptions

ConstraintSystem Polyhedron::minimized_constraints() const {
  if (is_empty()) {
    ConstraintSystem cs(dim_);
    cs.insert(Constraint(LinearExpression(Coefficient(-1)), RelKind::nonstrict));
    return cs;
  }
  minimize();
  ConstraintSystem raw = user_constraints_raw();
  if (!is_nnc()) return raw;

  // The epsilon representation can keep rows whose strict version is not
  // needed at user level; drop rows greedily while the set stays equal.
  std::vector<Constraint> rows;
  std::vector<std::string> seen;
  for (const Constraint& c : raw) {
    std::string key = c.to_string();
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      seen.push_back(std::move(key));
      rows.push_back(c);
    }
  }
  std::vector<bool> kept(rows.size(), true);
  auto try_drop = [&](std::size_t idx) {
    ConstraintSystem trial(dim_);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (kept[i] && i != idx) trial.insert(rows[i]);
    Polyhedron p(trial, topology_);
    if (p.equals(*this)) kept[idx] = false;
  };
  for (int pass = 0; pass < 2; ++pass) {
    bool want_strict = pass == 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!rows[i].is_equality() && rows[i].is_strict() == want_strict)
        try_drop(i);
  }
  ConstraintSystem out(dim_);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (kept[i]) out.insert(rows[i]);
  return out;
}

GeneratorSystem Polyhedron::minimized_generators() const {
  if (is_empty()) return GeneratorSystem(dim_);
  minimize();
  GeneratorSystem raw = user_generators_raw();
  if (!is_nnc()) return raw;

  std::vector<Generator> rows;
  std::vector<std::string> seen;
  for (const Generator& g : raw) {
    std::string key = g.to_string();
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      seen.push_back(std::move(key));
      rows.push_back(g);
    }
  }
  std::vector<bool> kept(rows.size(), true);
  auto try_drop = [&](std::size_t idx) {
    GeneratorSystem trial(dim_);
    bool has_point = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!kept[i] || i == idx) continue;
      trial.insert(rows[i]);
      has_point = has_point || rows[i].kind() == GenKind::point;
    }
    if (!has_point) return;
    Polyhedron p(trial, topology_);
    if (p.equals(*this)) kept[idx] = false;
  };
  const GenKind order[] = {GenKind::closure_point, GenKind::point, GenKind::ray,
                           GenKind::line};
  for (GenKind k : order)
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].kind() == k) try_drop(i);
  GeneratorSystem out(dim_);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (kept[i]) out.insert(rows[i]);
  return out;
}

ConstraintSystem Polyhedron::constraints() const {
  if (is_empty()) return minimized_constraints();
  ensure_constraints();
  return user_constraints_raw();
}

GeneratorSystem Polyhedron::generators() const {
  if (is_empty()) return GeneratorSystem(dim_);
  ensure_generators();
  return user_generators_raw();
}

// ---------------------------------------------------------------------------
// Mutators

void Polyhedron::add_constraint(const Constraint& c) {
  ConstraintSystem cs(dim_);
  cs.insert(c);
  add_constraints(cs);
}

void Polyhedron::add_constraints(const ConstraintSystem& cs) {
  for (const Constraint& c : cs) {
    if (c.space_dimension() > dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "constraint dimension exceeds the polyhedron's");
    if (c.is_strict() && !is_nnc())
      throw DomainError(ErrorKind::topology_mismatch,
                        "strict inequality on a topologically closed polyhedron");
  }
  if (cs.size() == 0 || is_empty()) return;
  Polyhedron w = *this;
  w.ensure_constraints();
  const std::size_t old_rows = w.con_.size();
  for (const Constraint& c : cs) w.con_.push_back(w.row_from_constraint(c));
  if (w.gen_valid_ && w.sat_valid_) {
    try {
      if (!dd::conversion(w.con_, old_rows, w.gen_, w.sat_, is_nnc(), true)) {
        set_empty();
        return;
      }
    } catch (const std::bad_alloc&) {
      rethrow_oom();
    }
    w.empty_known_ = true;
    w.empty_ = false;
  } else {
    w.gen_valid_ = w.sat_valid_ = false;
    w.empty_known_ = false;
  }
  w.minimized_ = false;
  *this = std::move(w);
}

void Polyhedron::add_generator(const Generator& g) {
  GeneratorSystem gs(dim_);
  gs.insert(g);
  add_generators(gs);
}

void Polyhedron::add_generators(const GeneratorSystem& gs) {
  for (const Generator& g : gs) {
    if (g.space_dimension() > dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "generator dimension exceeds the polyhedron's");
    if (g.kind() == GenKind::closure_point && !is_nnc())
      throw DomainError(ErrorKind::topology_mismatch,
                        "closure point on a topologically closed polyhedron");
  }
  if (gs.size() == 0) return;
  if (is_empty()) {
    if (!gs.has_points())
      throw DomainError(ErrorKind::invalid_argument,
                        "generators added to an empty polyhedron must include "
                        "a point");
    GeneratorSystem padded(dim_);
    for (const Generator& g : gs) padded.insert(g);
    *this = Polyhedron(padded, topology_);
    return;
  }
  Polyhedron w = *this;
  w.ensure_generators();
  for (const Generator& g : gs)
    for (dd::Row& r : w.rows_from_generator(g)) w.gen_.push_back(std::move(r));
  w.con_valid_ = w.sat_valid_ = false;
  w.minimized_ = false;
  *this = std::move(w);
}

void Polyhedron::intersection_assign(const Polyhedron& q) {
  check_binary_compat(q, "intersection");
  if (is_empty()) return;
  if (q.is_empty()) {
    set_empty();
    return;
  }
  q.ensure_constraints();
  Polyhedron w = *this;
  w.ensure_constraints();
  const std::size_t old_rows = w.con_.size();
  for (const dd::Row& r : q.con_)
    if (!q.row_is_scaffolding(r)) w.con_.push_back(r);
  if (w.con_.size() == old_rows) return;
  if (w.gen_valid_ && w.sat_valid_) {
    try {
      if (!dd::conversion(w.con_, old_rows, w.gen_, w.sat_, is_nnc(), true)) {
        set_empty();
        return;
      }
    } catch (const std::bad_alloc&) {
      rethrow_oom();
    }
    w.empty_known_ = true;
    w.empty_ = false;
  } else {
    w.gen_valid_ = w.sat_valid_ = false;
    w.empty_known_ = false;
  }
  w.minimized_ = false;
  *this = std::move(w);
}

void Polyhedron::upper_bound_assign(const Polyhedron& q) {
  check_binary_compat(q, "upper_bound");
  if (q.is_empty()) return;
  if (is_empty()) {
    *this = q;
    return;
  }
  q.ensure_generators();
  Polyhedron w = *this;
  w.ensure_generators();
  for (const dd::Row& r : q.gen_) w.gen_.push_back(r);
  w.con_valid_ = w.sat_valid_ = false;
  w.minimized_ = false;
  *this = std::move(w);
}

void Polyhedron::difference_assign(const Polyhedron& q) {
  check_binary_compat(q, "difference");
  if (is_empty() || q.is_empty()) return;
  if (q.contains(*this)) {
    set_empty();
    return;
  }
  Polyhedron result = Polyhedron::empty(dim_, topology_);
  ConstraintSystem qcs = q.minimized_constraints();
  for (const Constraint& c : qcs) {
    if (c.is_tautology()) continue;
    // Complement sides of c as (expression, open?) pairs meaning expr > 0
    // or expr >= 0.
    std::vector<std::pair<LinearExpression, bool>> sides;
    switch (c.kind()) {
      case RelKind::nonstrict:
        sides.emplace_back(-c.expression(), true);
        break;
      case RelKind::strict:
        sides.emplace_back(-c.expression(), false);
        break;
      case RelKind::equal:
        sides.emplace_back(c.expression(), true);
        sides.emplace_back(-c.expression(), true);
        break;
    }
    for (auto& [f, open] : sides) {
      if (open && !is_nnc()) {
        // A closed polyhedron cannot carry f > 0; the tight substitute is
        // the closure of the open piece, which is P meet {f >= 0} when P
        // actually enters the open side and empty otherwise.
        Extremum hi = maximize(f);
        if (hi.bounded && hi.value.sign() <= 0) continue;
      }
      Polyhedron piece = *this;
      piece.add_constraint(Constraint(
          std::move(f), open && is_nnc() ? RelKind::strict : RelKind::nonstrict));
      if (!piece.is_empty()) result.upper_bound_assign(piece);
    }
  }
  *this = std::move(result);
}

void Polyhedron::time_elapse_assign(const Polyhedron& q) {
  check_binary_compat(q, "time_elapse");
  if (is_empty()) return;
  if (q.is_empty()) {
    set_empty();
    return;
  }
  q.ensure_generators();
  Polyhedron w = *this;
  w.ensure_generators();
  const dim_t h = h_dim();
  for (const dd::Row& qr : q.gen_) {
    if (qr.a[0].is_zero()) {
      w.gen_.push_back(qr);  // rays and lines flow unchanged
      continue;
    }
    dd::Row dir;  // a point of q contributes its direction from the origin
    dir.a = qr.a;
    dir.a[0] = Coefficient(0);
    if (is_nnc()) dir.a[h - 1] = Coefficient(0);
    if (normalize_row(dir)) w.gen_.push_back(std::move(dir));
  }
  w.con_valid_ = w.sat_valid_ = false;
  w.minimized_ = false;
  *this = std::move(w);
}

void Polyhedron::topological_closure_assign() {
  if (!is_nnc() || is_empty()) return;
  ensure_constraints();
  ConstraintSystem raw = user_constraints_raw();
  ConstraintSystem cs(dim_);
  for (const Constraint& c : raw)
    cs.insert(c.is_strict() ? Constraint(c.expression(), RelKind::nonstrict)
                            : c);
  *this = Polyhedron(cs, topology_);
}

void Polyhedron::affine_image(Variable v, const LinearExpression& e,
                              const Coefficient& denominator) {
  if (v.id() >= dim_ || e.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "affine image outside the polyhedron's dimensions");
  if (denominator.is_zero())
    throw DomainError(ErrorKind::invalid_argument,
                      "affine image denominator is zero");
  if (is_empty()) return;
  Polyhedron w = *this;
  w.ensure_generators();
  const dim_t h = h_dim();
  dd::Row er;
  er.a.assign(h, Coefficient(0));
  er.a[0] = e.inhomogeneous_term();
  for (dim_t d = 0; d < e.space_dimension(); ++d)
    er.a[1 + d] = e.coefficient(Variable(d));
  dd::Rows rows = std::move(w.gen_);
  w.gen_.clear();
  for (dd::Row& r : rows) {
    Coefficient nv = row_dot(er, r);
    for (dim_t i = 0; i < h; ++i)
      if (i != 1 + v.id()) r.a[i] = denominator * r.a[i];
    r.a[1 + v.id()] = std::move(nv);
    if (denominator.sign() < 0 && !r.line)
      for (auto& c : r.a) c = -c;
    if (normalize_row(r)) w.gen_.push_back(std::move(r));
  }
  w.con_valid_ = w.sat_valid_ = false;
  w.minimized_ = false;
  *this = std::move(w);
}

void Polyhedron::affine_preimage(Variable v, const LinearExpression& e,
                                 const Coefficient& denominator) {
  if (v.id() >= dim_ || e.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "affine preimage outside the polyhedron's dimensions");
  if (denominator.is_zero())
    throw DomainError(ErrorKind::invalid_argument,
                      "affine preimage denominator is zero");
  if (is_empty()) return;
  Polyhedron w = *this;
  w.ensure_constraints();
  const dim_t h = h_dim();
  dd::Rows rows = std::move(w.con_);
  w.con_.clear();
  for (dd::Row& r : rows) {
    const Coefficient cv = r.a[1 + v.id()];
    if (cv.is_zero()) {
      w.con_.push_back(std::move(r));
      continue;
    }
    dd::Row nr;
    nr.line = r.line;
    nr.a.assign(h, Coefficient(0));
    nr.a[0] = denominator * r.a[0] + cv * e.inhomogeneous_term();
    for (dim_t d = 0; d < dim_; ++d) {
      Coefficient base = d == v.id() ? Coefficient(0) : r.a[1 + d];
      nr.a[1 + d] = denominator * base + cv * e.coefficient(Variable(d));
    }
    if (is_nnc()) nr.a[h - 1] = denominator * r.a[h - 1];
    if (denominator.sign() < 0)
      for (auto& c : nr.a) c = -c;
    if (normalize_row(nr)) w.con_.push_back(std::move(nr));
  }
  w.gen_valid_ = w.sat_valid_ = false;
  w.minimized_ = false;
  w.empty_known_ = false;  // substitution can make the system unsatisfiable
  *this = std::move(w);
}

void Polyhedron::generalized_affine_image(Variable v, RelKind rel,
                                          const LinearExpression& e,
                                          const Coefficient& denominator) {
  if (rel == RelKind::equal) {
    affine_image(v, e, denominator);
    return;
  }
  if (v.id() >= dim_ || e.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "generalized affine image outside the polyhedron's "
                      "dimensions");
  if (denominator.is_zero())
    throw DomainError(ErrorKind::invalid_argument,
                      "generalized affine image denominator is zero");
  if (rel == RelKind::strict && !is_nnc())
    throw DomainError(ErrorKind::topology_mismatch,
                      "strict relation on a topologically closed polyhedron");
  if (is_empty()) return;
  const dim_t old_dim = dim_;
  Polyhedron w = *this;
  w.add_space_dimensions_and_embed(1);
  // The new value satisfies denominator * v' rel e(old values).
  LinearExpression lhs = denominator * LinearExpression(Variable(old_dim));
  w.add_constraint(Constraint(lhs - e, rel));
  std::vector<std::optional<dim_t>> map(old_dim + 1);
  for (dim_t d = 0; d < old_dim; ++d)
    if (d != v.id()) map[d] = d;
  map[old_dim] = v.id();
  w.map_space_dimensions(map, old_dim);
  *this = std::move(w);
}

// ---------------------------------------------------------------------------
// Dimension surgery

void Polyhedron::add_space_dimensions_and_embed(dim_t m) {
  if (m == 0) return;
  const dim_t old_dim = dim_;
  const bool nnc = is_nnc();
  dim_ += m;
  if (empty_known_ && empty_) {
    set_empty();
    return;
  }
  auto widen = [&](dd::Rows& rows) {
    for (dd::Row& r : rows) {
      std::vector<Coefficient> a(h_dim(), Coefficient(0));
      for (dim_t i = 0; i <= old_dim; ++i) a[i] = std::move(r.a[i]);
      if (nnc) a[h_dim() - 1] = std::move(r.a[old_dim + 1]);
      r.a = std::move(a);
    }
  };
  if (con_valid_) widen(con_);
  if (gen_valid_) {
    widen(gen_);
    for (dim_t k = 0; k < m; ++k) {
      dd::Row l;
      l.line = true;
      l.a.assign(h_dim(), Coefficient(0));
      l.a[1 + old_dim + k] = Coefficient(1);
      gen_.push_back(std::move(l));
      if (sat_valid_) sat_.push_back(dd::BitRow::ones(con_.size()));
    }
  }
}

void Polyhedron::add_space_dimensions_and_project(dim_t m) {
  if (m == 0) return;
  const dim_t old_dim = dim_;
  const bool nnc = is_nnc();
  dim_ += m;
  if (empty_known_ && empty_) {
    set_empty();
    return;
  }
  auto widen = [&](dd::Rows& rows) {
    for (dd::Row& r : rows) {
      std::vector<Coefficient> a(h_dim(), Coefficient(0));
      for (dim_t i = 0; i <= old_dim; ++i) a[i] = std::move(r.a[i]);
      if (nnc) a[h_dim() - 1] = std::move(r.a[old_dim + 1]);
      r.a = std::move(a);
    }
  };
  if (con_valid_) {
    widen(con_);
    for (dim_t k = 0; k < m; ++k) {
      dd::Row eq;  // the new dimension is pinned to zero
      eq.line = true;
      eq.a.assign(h_dim(), Coefficient(0));
      eq.a[1 + old_dim + k] = Coefficient(1);
      con_.push_back(std::move(eq));
      if (sat_valid_)
        for (auto& row : sat_) row.append(true);
    }
  }
  if (gen_valid_) widen(gen_);
  if (!con_valid_ && sat_valid_) sat_valid_ = false;
}

void Polyhedron::remove_space_dimensions(const std::set<dim_t>& dims) {
  for (dim_t d : dims)
    if (d >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "removed dimension exceeds the polyhedron's");
  if (dims.empty()) return;
  const dim_t new_dim = dim_ - dims.size();
  if (is_empty()) {
    dim_ = new_dim;
    set_empty();
    return;
  }
  Polyhedron w = *this;
  w.ensure_generators();
  const bool nnc = is_nnc();
  dd::Rows rows = std::move(w.gen_);
  w.gen_.clear();
  w.dim_ = new_dim;
  for (dd::Row& r : rows) {
    std::vector<Coefficient> a;
    a.reserve(w.h_dim());
    a.push_back(std::move(r.a[0]));
    for (dim_t d = 0; d < dim_; ++d)
      if (!dims.count(d)) a.push_back(std::move(r.a[1 + d]));
    if (nnc) a.push_back(std::move(r.a[h_dim() - 1]));
    r.a = std::move(a);
    if (normalize_row(r)) w.gen_.push_back(std::move(r));
  }
  w.con_valid_ = w.sat_valid_ = false;
  w.con_.clear();
  w.sat_.clear();
  w.minimized_ = false;
  dim_ = w.dim_;  // keep this object's dim consistent before the move
  *this = std::move(w);
}

void Polyhedron::remove_higher_space_dimensions(dim_t new_dim) {
  if (new_dim > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "target dimension exceeds the polyhedron's");
  std::set<dim_t> dims;
  for (dim_t d = new_dim; d < dim_; ++d) dims.insert(d);
  remove_space_dimensions(dims);
}

void Polyhedron::map_space_dimensions(
    const std::vector<std::optional<dim_t>>& map, dim_t new_dim) {
  if (map.size() != dim_)
    throw DomainError(ErrorKind::invalid_argument,
                      "dimension map must cover every dimension");
  std::vector<std::optional<dim_t>> source(new_dim);
  dim_t mapped = 0;
  for (dim_t d = 0; d < dim_; ++d) {
    if (!map[d]) continue;
    dim_t t = *map[d];
    if (t >= new_dim || source[t])
      throw DomainError(ErrorKind::invalid_argument,
                        "dimension map must be injective into the target");
    source[t] = d;
    ++mapped;
  }
  if (mapped != new_dim)
    throw DomainError(ErrorKind::invalid_argument,
                      "dimension map must cover the whole target space");
  const bool permutation = mapped == dim_;
  const bool nnc = is_nnc();
  if (is_empty()) {
    dim_ = new_dim;
    set_empty();
    return;
  }
  auto remap = [&](dd::Rows& rows, dim_t old_dim) {
    for (dd::Row& r : rows) {
      std::vector<Coefficient> a(new_dim + (nnc ? 2 : 1), Coefficient(0));
      a[0] = std::move(r.a[0]);
      for (dim_t t = 0; t < new_dim; ++t) a[1 + t] = std::move(r.a[1 + *source[t]]);
      if (nnc) a[new_dim + 1] = std::move(r.a[old_dim + 1]);
      r.a = std::move(a);
    }
  };
  if (permutation) {
    const dim_t old_dim = dim_;
    if (con_valid_) remap(con_, old_dim);
    if (gen_valid_) remap(gen_, old_dim);
    dim_ = new_dim;
    return;  // pure renaming: every flag still holds
  }
  Polyhedron w = *this;
  w.ensure_generators();
  const dim_t old_dim = dim_;
  dd::Rows rows = std::move(w.gen_);
  w.gen_.clear();
  for (dd::Row& r : rows) {
    std::vector<Coefficient> a(new_dim + (nnc ? 2 : 1), Coefficient(0));
    a[0] = std::move(r.a[0]);
    for (dim_t t = 0; t < new_dim; ++t) a[1 + t] = std::move(r.a[1 + *source[t]]);
    if (nnc) a[new_dim + 1] = std::move(r.a[old_dim + 1]);
    r.a = std::move(a);
    if (normalize_row(r)) w.gen_.push_back(std::move(r));
  }
  w.dim_ = new_dim;
  w.con_valid_ = w.sat_valid_ = false;
  w.con_.clear();
  w.sat_.clear();
  w.minimized_ = false;
  *this = std::move(w);
}

void Polyhedron::concatenate_assign(const Polyhedron& q) {
  if (topology_ != q.topology_)
    throw DomainError(ErrorKind::topology_mismatch,
                      "concatenate: topologies differ");
  const dim_t p_dim = dim_;
  const dim_t q_dim = q.dim_;
  if (is_empty() || q.is_empty()) {
    dim_ = p_dim + q_dim;
    set_empty();
    return;
  }
  q.ensure_constraints();
  Polyhedron w = *this;
  w.ensure_constraints();
  const bool nnc = is_nnc();
  w.dim_ = p_dim + q_dim;
  const dim_t h = w.h_dim();
  for (dd::Row& r : w.con_) {
    std::vector<Coefficient> a(h, Coefficient(0));
    for (dim_t i = 0; i <= p_dim; ++i) a[i] = std::move(r.a[i]);
    if (nnc) a[h - 1] = std::move(r.a[p_dim + 1]);
    r.a = std::move(a);
  }
  for (const dd::Row& qr : q.con_) {
    if (q.row_is_scaffolding(qr)) continue;
    dd::Row nr;
    nr.line = qr.line;
    nr.a.assign(h, Coefficient(0));
    nr.a[0] = qr.a[0];
    for (dim_t d = 0; d < q_dim; ++d) nr.a[1 + p_dim + d] = qr.a[1 + d];
    if (nnc) nr.a[h - 1] = qr.a[q_dim + 1];
    w.con_.push_back(std::move(nr));
  }
  w.gen_valid_ = w.sat_valid_ = false;
  w.gen_.clear();
  w.sat_.clear();
  w.minimized_ = false;
  dim_ = w.dim_;
  *this = std::move(w);
}

void Polyhedron::expand_space_dimension(Variable v, dim_t m) {
  if (v.id() >= dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "expanded dimension exceeds the polyhedron's");
  if (m == 0) return;
  if (is_empty()) {
    dim_ += m;
    set_empty();
    return;
  }
  ensure_constraints();
  ConstraintSystem raw = user_constraints_raw();
  const dim_t base = dim_;
  add_space_dimensions_and_embed(m);
  ConstraintSystem extra(dim_);
  for (const Constraint& c : raw) {
    if (c.coefficient(v).is_zero()) continue;
    for (dim_t k = 0; k < m; ++k) {
      LinearExpression e = c.expression();
      e.extend_to(dim_);
      e.set_coefficient(Variable(base + k), c.coefficient(v));
      e.set_coefficient(v, Coefficient(0));
      extra.insert(Constraint(std::move(e), c.kind()));
    }
  }
  add_constraints(extra);
}

void Polyhedron::fold_space_dimensions(const std::set<dim_t>& dims,
                                       Variable v) {
  if (v.id() >= dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "fold target exceeds the polyhedron's dimensions");
  if (dims.count(v.id()))
    throw DomainError(ErrorKind::invalid_argument,
                      "fold target cannot be one of the folded dimensions");
  for (dim_t d : dims)
    if (d >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "folded dimension exceeds the polyhedron's");
  if (dims.empty()) return;
  const dim_t new_dim = dim_ - dims.size();
  if (is_empty()) {
    dim_ = new_dim;
    set_empty();
    return;
  }
  auto final_index = [&](dim_t d) {
    dim_t below = 0;
    for (dim_t x : dims)
      if (x < d) ++below;
    return d - below;
  };
  Polyhedron acc = *this;
  acc.remove_space_dimensions(dims);
  for (dim_t j : dims) {
    Polyhedron variant = *this;
    std::vector<std::optional<dim_t>> map(dim_);
    for (dim_t d = 0; d < dim_; ++d) {
      if (d == v.id() || dims.count(d)) continue;
      map[d] = final_index(d);
    }
    map[j] = final_index(v.id());
    variant.map_space_dimensions(map, new_dim);
    acc.upper_bound_assign(variant);
  }
  *this = std::move(acc);
}

// ---------------------------------------------------------------------------
// Widenings

Polyhedron Polyhedron::h79_result(const Polyhedron& q) const {
  assert(!is_empty());
  ConstraintSystem mine = minimized_constraints();
  q.ensure_generators();
  GeneratorSystem qgens = q.user_generators_raw();
  ConstraintSystem kept(dim_);
  for (const Constraint& c : mine) {
    if (c.is_equality()) {
      // Equalities participate as their two halves, so a drifting equality
      // can still contribute one stable side.
      Constraint up(c.expression(), RelKind::nonstrict);
      Constraint down(-c.expression(), RelKind::nonstrict);
      if (system_entails(qgens, up)) kept.insert(up);
      if (system_entails(qgens, down)) kept.insert(down);
    } else if (system_entails(qgens, c)) {
      kept.insert(c);
    }
  }
  return Polyhedron(kept, topology_);
}

void Polyhedron::widening_h79_assign(const Polyhedron& q, unsigned* tokens) {
  check_binary_compat(q, "widening");
  if (is_empty()) {
    *this = q;
    return;
  }
  Polyhedron w = h79_result(q);
  if (tokens && *tokens > 0 && !w.equals(q)) {
    --*tokens;
    *this = q;
    return;
  }
  *this = std::move(w);
}

void Polyhedron::widening_bhrz03_assign(const Polyhedron& q, unsigned* tokens) {
  check_binary_compat(q, "widening");
  if (is_empty()) {
    *this = q;
    return;
  }
  if (contains(q)) return;  // already stable
  if (q.widening_certificate() < widening_certificate()) {
    *this = q;  // the convergence measure improved: no extrapolation needed
    return;
  }
  if (tokens && *tokens > 0) {
    --*tokens;
    *this = q;
    return;
  }
  *this = h79_result(q);
}

void Polyhedron::limited_h79_extrapolation_assign(const Polyhedron& q,
                                                  const ConstraintSystem& cs,
                                                  unsigned* tokens) {
  check_binary_compat(q, "widening");
  ConstraintSystem entailed(dim_);
  if (!q.is_empty()) {
    q.ensure_generators();
    GeneratorSystem qgens = q.user_generators_raw();
    for (const Constraint& c : cs) {
      if (c.space_dimension() > dim_)
        throw DomainError(ErrorKind::dimension_mismatch,
                          "bounding constraint exceeds the polyhedron's "
                          "dimensions");
      LinearExpression e = c.expression();
      e.extend_to(dim_);
      Constraint padded(std::move(e), c.kind());
      if (system_entails(qgens, padded)) entailed.insert(padded);
    }
  }
  Polyhedron w = is_empty() ? q : h79_result(q);
  w.add_constraints(entailed);
  if (tokens && *tokens > 0 && !w.equals(q)) {
    --*tokens;
    *this = q;
    return;
  }
  *this = std::move(w);
}

void Polyhedron::bounded_h79_extrapolation_assign(const Polyhedron& q,
                                                  const ConstraintSystem& cs,
                                                  unsigned* tokens) {
  check_binary_compat(q, "widening");
  ConstraintSystem box(dim_);
  if (!is_empty() && !q.is_empty()) {
    for (dim_t d = 0; d < dim_; ++d) {
      LinearExpression x = LinearExpression(Variable(d));
      Extremum plo = minimize(x), qlo = q.minimize(x);
      if (plo.bounded && qlo.bounded && plo.value == qlo.value &&
          plo.attained == qlo.attained) {
        LinearExpression e = Coefficient(plo.value.den()) * x;
        e -= LinearExpression(plo.value.num());
        box.insert(Constraint(std::move(e), plo.attained ? RelKind::nonstrict
                                                         : RelKind::strict));
      }
      Extremum phi = maximize(x), qhi = q.maximize(x);
      if (phi.bounded && qhi.bounded && phi.value == qhi.value &&
          phi.attained == qhi.attained) {
        LinearExpression e = Coefficient(-phi.value.den()) * x;
        e += LinearExpression(phi.value.num());
        box.insert(Constraint(std::move(e), phi.attained ? RelKind::nonstrict
                                                         : RelKind::strict));
      }
    }
  }
  for (const Constraint& c : cs) box.insert(c);
  limited_h79_extrapolation_assign(q, box, tokens);
}

std::pair<dim_t, std::size_t> Polyhedron::widening_certificate() const {
  if (is_empty()) return {dim_ + 1, 0};
  return {dim_ - affine_dim(), minimized_constraints().size()};
}

// ---------------------------------------------------------------------------
// Diagnostics

std::string Polyhedron::ascii_dump() const {
  std::ostringstream os;
  os << "topology " << (is_nnc() ? "NNC" : "C") << "\n";
  os << "space_dim " << dim_ << "\n";
  os << "status:";
  if (empty_known_) os << (empty_ ? " empty" : " nonempty");
  if (con_valid_) os << " con_valid";
  if (gen_valid_) os << " gen_valid";
  if (sat_valid_) os << " sat_valid";
  if (minimized_) os << " minimized";
  os << "\n";
  auto dump_rows = [&](const dd::Rows& rows, const char* tag, char line_mark,
                       char row_mark) {
    os << tag << " " << rows.size() << "\n";
    for (const dd::Row& r : rows) {
      os << "  " << (r.line ? line_mark : row_mark);
      for (const auto& c : r.a) os << " " << c.to_string();
      os << "\n";
    }
  };
  if (con_valid_) dump_rows(con_, "con_sys", '=', '>');
  if (gen_valid_) dump_rows(gen_, "gen_sys", 'L', 'R');
  if (sat_valid_) {
    os << "sat " << sat_.size() << "x" << (sat_.empty() ? 0 : sat_[0].size())
       << "\n";
    for (const auto& row : sat_) {
      os << "  ";
      for (std::size_t j = 0; j < row.size(); ++j) os << (row.test(j) ? 1 : 0);
      os << "\n";
    }
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Polyhedron& p) {
  if (p.is_empty()) return os << "false";
  ConstraintSystem cs = p.minimized_constraints();
  if (cs.size() == 0) return os << "true";
  return os << cs.to_string();
}

}  // namespace polydom
