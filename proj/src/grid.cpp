// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Everything here is lattice algebra over homogeneous rational rows indexed
// by (x_0 .. x_{n-1}, δ). A congruence description denotes the row module
//
//     Z{proper rows} + Z e_δ + R{equality rows},
//
// where a proper row r means r·(x, 1) ∈ Z and an equality row r·(x, 1) = 0;
// a generator description denotes the point coset
//
//     (point, 1) + Z{(parameter, 0)} + R{(line, 0)}.
//
// Minimal forms are canonical: the real part is put in reduced row echelon
// form and the lattice part in a Hermite staircase (computed over a common
// denominator and scaled back, which preserves uniqueness). Congruence rows
// take pivots on the lowest nonzero coordinate with δ ordered last;
// generator rows take pivots on the highest nonzero coordinate, so the two
// staircases complete each other. Conversion pads either description to a
// square basis with unit rows for the uncovered coordinates and inverts it
// exactly; by dual-basis expansion the trivial row e_δ and the base point
// are each other's duals, proper rows pair with parameters, and equalities
// pair with the padding of the opposite side.

#include "polydom/grid.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <utility>

namespace polydom {

namespace {

using HRow = std::vector<Rational>;

std::size_t first_nonzero(const HRow& r) {
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!r[i].is_zero()) return i;
  return r.size();
}

std::size_t last_nonzero(const HRow& r) {  // pre: some entry is nonzero
  for (std::size_t i = r.size(); i-- > 0;)
    if (!r[i].is_zero()) return i;
  return r.size();
}

bool is_zero_row(const HRow& r) { return first_nonzero(r) == r.size(); }

// r·(coords, 1); r is one entry longer than coords.
Rational affine_value(const HRow& r, const std::vector<Rational>& coords) {
  Rational s = r.back();
  for (std::size_t i = 0; i < coords.size(); ++i) s += r[i] * coords[i];
  return s;
}

// Σ r_i d_i over the coordinate entries only.
Rational direction_value(const HRow& r, const std::vector<Rational>& d) {
  Rational s;
  for (std::size_t i = 0; i < d.size(); ++i) s += r[i] * d[i];
  return s;
}

// gcd extended to nonnegative rationals: the generator of aZ + bZ.
Rational rational_gcd(const Rational& a, const Rational& b) {
  if (a.is_zero()) return b.abs();
  if (b.is_zero()) return a.abs();
  return Rational(Coefficient::gcd(a.num() * b.den(), b.num() * a.den()),
                  a.den() * b.den());
}

// pre: x.den() divides t
Coefficient scaled_to(const Rational& x, const Coefficient& t) {
  return x.num() * Coefficient::div_exact(t, x.den());
}

Coefficient common_denominator(const std::vector<Rational>& v) {
  Coefficient t(1);
  for (const Rational& e : v) t = Coefficient::lcm(t, e.den());
  return t;
}

// Column visiting order; `desc` scans from the last column down.
std::vector<std::size_t> scan_order(std::size_t width, bool desc) {
  std::vector<std::size_t> cols(width);
  for (std::size_t i = 0; i < width; ++i) cols[i] = desc ? width - 1 - i : i;
  return cols;
}

// Reduced row echelon form over the rationals; pivot columns are also
// eliminated from the `also` rows. Zero rows are dropped; returns the pivot
// column of each surviving row in placement order.
std::vector<std::size_t> rref(std::vector<HRow>& rows, std::size_t width,
                              bool desc, const std::vector<HRow*>& also) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c : scan_order(width, desc)) {
    if (r >= rows.size()) break;
    budget_checkpoint();
    std::size_t sel = rows.size();
    for (std::size_t i = r; i < rows.size(); ++i)
      if (!rows[i][c].is_zero()) {
        sel = i;
        break;
      }
    if (sel == rows.size()) continue;
    std::swap(rows[r], rows[sel]);
    const Rational piv = rows[r][c];
    for (Rational& e : rows[r]) e /= piv;
    auto eliminate = [&](HRow& row) {
      if (row[c].is_zero()) return;
      const Rational t = row[c];
      for (std::size_t j = 0; j < row.size(); ++j) row[j] -= t * rows[r][j];
    };
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != r) eliminate(rows[i]);
    for (HRow* p : also) eliminate(*p);
    pivots.push_back(c);
    ++r;
  }
  rows.resize(r);
  return pivots;
}

// Hermite staircase of the row lattice: pivots positive on distinct columns
// in scan order, every entry above a pivot reduced into [0, pivot). The rows
// are scaled to a common denominator, reduced over the integers, and scaled
// back; the result is the unique such basis of the rational lattice. Zero
// rows are dropped; returns the pivot columns in placement order.
std::vector<std::size_t> hermite(std::vector<HRow>& rows, std::size_t width,
                                 bool desc) {
  Coefficient d(1);
  for (const HRow& r : rows)
    for (const Rational& e : r) d = Coefficient::lcm(d, e.den());
  std::vector<std::vector<Coefficient>> m;
  m.reserve(rows.size());
  for (const HRow& r : rows) {
    std::vector<Coefficient> row;
    row.reserve(width);
    for (const Rational& e : r) row.push_back(scaled_to(e, d));
    m.push_back(std::move(row));
  }
  auto submul = [](std::vector<Coefficient>& a, const Coefficient& q,
                   const std::vector<Coefficient>& b) {
    if (q.is_zero()) return;
    for (std::size_t j = 0; j < a.size(); ++j) a[j] -= q * b[j];
  };
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c : scan_order(width, desc)) {
    if (r >= m.size()) break;
    for (;;) {
      budget_checkpoint();
      std::size_t sel = m.size();
      for (std::size_t i = r; i < m.size(); ++i) {
        if (m[i][c].is_zero()) continue;
        if (sel == m.size() || m[i][c].abs() < m[sel][c].abs()) sel = i;
      }
      if (sel == m.size()) break;
      if (m[sel][c].sign() < 0)
        for (Coefficient& e : m[sel]) e = -e;
      // One Euclid round: leave every other entry of the column in
      // [0, pivot); nonzero leftovers are strictly smaller, so the loop
      // terminates with a unique nonzero entry.
      bool unique = true;
      for (std::size_t i = r; i < m.size(); ++i) {
        if (i == sel || m[i][c].is_zero()) continue;
        submul(m[i], Coefficient::div_floor(m[i][c], m[sel][c]), m[sel]);
        if (!m[i][c].is_zero()) unique = false;
      }
      if (unique) {
        std::swap(m[r], m[sel]);
        for (std::size_t k = 0; k < r; ++k)
          submul(m[k], Coefficient::div_floor(m[k][c], m[r][c]), m[r]);
        pivots.push_back(c);
        ++r;
        break;
      }
    }
  }
  rows.clear();
  rows.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    HRow row;
    row.reserve(width);
    for (const Coefficient& e : m[i]) row.push_back(Rational(e, d));
    rows.push_back(std::move(row));
  }
  return pivots;
}

// Minimizes congruence rows in place; returns false when unsatisfiable.
// Afterwards eqs is the echelon of the real span and mods the staircase of
// the proper-row lattice modulo that span, with e_δ itself removed.
bool reduce_congruence_rows(dim_t n, std::vector<HRow>& eqs,
                            std::vector<HRow>& mods) {
  const std::size_t width = n + 1;
  HRow trivial(width, Rational());
  trivial[n] = Rational(1);
  mods.push_back(std::move(trivial));
  std::vector<HRow*> also;
  also.reserve(mods.size());
  for (HRow& m : mods) also.push_back(&m);
  const auto epiv = rref(eqs, width, false, also);
  if (!epiv.empty() && epiv.back() == n) return false;  // row says 1 = 0
  const auto mpiv = hermite(mods, width, false);
  // The lattice contains e_δ, so exactly one staircase row is pure δ. Its
  // value divides 1; anything below 1 pins the constant term of every point
  // to a fractional class, which nothing satisfies.
  for (std::size_t i = 0; i < mods.size(); ++i) {
    if (mpiv[i] != n) continue;
    const bool consistent = mods[i][n] == Rational(1);
    mods.erase(mods.begin() + static_cast<std::ptrdiff_t>(i));
    return consistent;
  }
  assert(false && "trivial congruence row lost");
  return false;
}

// Canonicalizes a generator description in place: lines echelonized and
// their pivot coordinates eliminated from parameters and point, parameters
// in staircase form, point reduced into the fundamental parameter cell.
// Generator pivots sit on the highest nonzero coordinate.
void reduce_generator_rows(std::vector<Rational>& point,
                           std::vector<std::vector<Rational>>& params,
                           std::vector<std::vector<Rational>>& lines) {
  const std::size_t n = point.size();
  std::vector<HRow*> also;
  also.reserve(params.size() + 1);
  for (auto& p : params) also.push_back(&p);
  also.push_back(&point);
  rref(lines, n, true, also);
  const auto ppiv = hermite(params, n, true);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::size_t c = ppiv[i];
    const Coefficient k = (point[c] / params[i][c]).floor();
    if (k.is_zero()) continue;
    const Rational rk{Coefficient(k)};
    for (std::size_t j = 0; j < n; ++j) point[j] -= rk * params[i][j];
  }
}

// Exact inverse of a square rational matrix. pre: nonsingular; callers pass
// staircase bases padded to full rank, which cannot degenerate.
std::vector<HRow> invert(std::vector<HRow> m) {
  const std::size_t k = m.size();
  std::vector<HRow> inv(k, HRow(k, Rational()));
  for (std::size_t i = 0; i < k; ++i) inv[i][i] = Rational(1);
  for (std::size_t c = 0; c < k; ++c) {
    budget_checkpoint();
    std::size_t sel = k;
    for (std::size_t i = c; i < k; ++i)
      if (!m[i][c].is_zero()) {
        sel = i;
        break;
      }
    assert(sel != k && "singular basis completion");
    std::swap(m[c], m[sel]);
    std::swap(inv[c], inv[sel]);
    const Rational piv = m[c][c];
    for (Rational& e : m[c]) e /= piv;
    for (Rational& e : inv[c]) e /= piv;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == c || m[i][c].is_zero()) continue;
      const Rational t = m[i][c];
      for (std::size_t j = 0; j < k; ++j) {
        m[i][j] -= t * m[c][j];
        inv[i][j] -= t * inv[c][j];
      }
    }
  }
  return inv;
}

// Minimized congruence rows -> canonical generators via dual basis columns.
void generators_from_congruences(dim_t n, const std::vector<HRow>& eqs,
                                 const std::vector<HRow>& mods,
                                 std::vector<Rational>& point,
                                 std::vector<std::vector<Rational>>& params,
                                 std::vector<std::vector<Rational>>& lines) {
  const std::size_t width = n + 1;
  std::vector<char> covered(width, 0);
  covered[n] = 1;
  std::vector<HRow> basis;
  basis.reserve(width);
  for (const HRow& r : eqs) {
    covered[first_nonzero(r)] = 1;
    basis.push_back(r);
  }
  const std::size_t mods_at = basis.size();
  for (const HRow& r : mods) {
    covered[first_nonzero(r)] = 1;
    basis.push_back(r);
  }
  const std::size_t point_at = basis.size();
  HRow trivial(width, Rational());
  trivial[n] = Rational(1);
  basis.push_back(std::move(trivial));
  const std::size_t free_at = basis.size();
  for (std::size_t c = 0; c < n; ++c) {
    if (covered[c]) continue;
    HRow unit(width, Rational());
    unit[c] = Rational(1);
    basis.push_back(std::move(unit));
  }
  const auto inv = invert(std::move(basis));
  auto column = [&](std::size_t j) {
    std::vector<Rational> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = inv[i][j];
    return col;
  };
  params.clear();
  lines.clear();
  for (std::size_t j = mods_at; j < point_at; ++j) params.push_back(column(j));
  point = column(point_at);
  assert(inv[n][point_at] == Rational(1));
  for (std::size_t j = free_at; j < width; ++j) lines.push_back(column(j));
  reduce_generator_rows(point, params, lines);
}

// Minimized generators -> canonical congruence rows: complete the generator
// columns to a square basis, invert, and read the dual rows.
void congruences_from_generators(dim_t n, const std::vector<Rational>& point,
                                 const std::vector<std::vector<Rational>>& params,
                                 const std::vector<std::vector<Rational>>& lines,
                                 std::vector<HRow>& eqs,
                                 std::vector<HRow>& mods) {
  const std::size_t width = n + 1;
  std::vector<char> covered(n, 0);
  for (const auto& r : params) covered[last_nonzero(r)] = 1;
  for (const auto& r : lines) covered[last_nonzero(r)] = 1;
  std::vector<HRow> cols;
  cols.reserve(width);
  HRow pc(width, Rational());
  for (std::size_t i = 0; i < n; ++i) pc[i] = point[i];
  pc[n] = Rational(1);
  cols.push_back(std::move(pc));
  auto direction_column = [&](const std::vector<Rational>& v) {
    HRow col(width, Rational());
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i];
    return col;
  };
  for (const auto& q : params) cols.push_back(direction_column(q));
  for (const auto& l : lines) cols.push_back(direction_column(l));
  const std::size_t virt_at = cols.size();
  for (std::size_t c = 0; c < n; ++c) {
    if (covered[c]) continue;
    HRow unit(width, Rational());
    unit[c] = Rational(1);
    cols.push_back(std::move(unit));
  }
  std::vector<HRow> basis(width, HRow(width, Rational()));
  for (std::size_t j = 0; j < width; ++j)
    for (std::size_t i = 0; i < width; ++i) basis[i][j] = cols[j][i];
  const auto inv = invert(std::move(basis));
  // Row 0 is dual to the point column, which expands to e_δ exactly: the
  // implicit trivial congruence. Line duals are annihilated on the grid.
  eqs.clear();
  mods.clear();
  for (std::size_t j = 1; j < 1 + params.size(); ++j) mods.push_back(inv[j]);
  for (std::size_t j = virt_at; j < width; ++j) eqs.push_back(inv[j]);
  const bool ok = reduce_congruence_rows(n, eqs, mods);
  assert(ok && "a generated grid is never unsatisfiable");
  (void)ok;
}

LinearExpression row_expression(const std::vector<Rational>& v, dim_t dim,
                                const Coefficient& scale,
                                const Rational& inhom) {
  std::vector<std::pair<dim_t, Coefficient>> terms;
  for (dim_t i = 0; i < dim && i < v.size(); ++i)
    if (!v[i].is_zero()) terms.emplace_back(i, scaled_to(v[i], scale));
  LinearExpression e =
      LinearExpression::from_terms(terms, scaled_to(inhom, scale));
  e.extend_to(dim);
  return e;
}

CongruenceSystem render_cgs(dim_t dim, const std::vector<HRow>& eqs,
                            const std::vector<HRow>& mods) {
  CongruenceSystem out(dim);
  auto emit = [&](const HRow& r, bool equality) {
    const Coefficient t = common_denominator(r);
    out.insert(Congruence(row_expression(r, dim, t, r[dim]),
                          equality ? Coefficient(0) : t));
  };
  for (const HRow& r : eqs) emit(r, true);
  for (const HRow& r : mods) emit(r, false);
  return out;
}

GridGeneratorSystem render_gens(dim_t dim, const std::vector<Rational>& point,
                                const std::vector<std::vector<Rational>>& params,
                                const std::vector<std::vector<Rational>>& lines) {
  GridGeneratorSystem out(dim);
  const Rational zero;
  {
    const Coefficient t = common_denominator(point);
    out.insert(
        GridGenerator::grid_point(row_expression(point, dim, t, zero), t));
  }
  for (const auto& q : params) {
    const Coefficient t = common_denominator(q);
    out.insert(GridGenerator::parameter(row_expression(q, dim, t, zero), t));
  }
  for (const auto& l : lines) {
    const Coefficient t = common_denominator(l);
    out.insert(GridGenerator::grid_line(row_expression(l, dim, t, zero)));
  }
  return out;
}

void validate_affine(dim_t dim, Variable v, const LinearExpression& e,
                     const Coefficient& den, const char* op) {
  if (den.is_zero())
    throw DomainError(ErrorKind::invalid_argument,
                      std::string(op) + ": zero denominator");
  if (v.id() >= dim || e.space_dimension() > dim)
    throw DomainError(ErrorKind::dimension_mismatch,
                      std::string(op) + ": dimension exceeded");
}

}  // namespace

Grid::Grid(dim_t dim) : dim_(dim) {
  cgs_.set_space_dimension(dim);
  ggs_.set_space_dimension(dim);
  cgs_ok_ = true;
}

Grid::Grid(dim_t dim, bool make_empty) : dim_(dim) {
  cgs_.set_space_dimension(dim);
  ggs_.set_space_dimension(dim);
  if (make_empty)
    set_empty();
  else
    cgs_ok_ = true;
}

Grid Grid::universe(dim_t dim) { return Grid(dim); }
Grid Grid::empty(dim_t dim) { return Grid(dim, true); }

Grid::Grid(const CongruenceSystem& cgs) : dim_(cgs.space_dimension()) {
  cgs_ = cgs;
  ggs_.set_space_dimension(dim_);
  cgs_ok_ = true;
}

Grid::Grid(const GridGeneratorSystem& ggs) : dim_(ggs.space_dimension()) {
  cgs_.set_space_dimension(dim_);
  ggs_.set_space_dimension(dim_);
  if (ggs.empty()) {
    set_empty();
    return;
  }
  if (!ggs.has_points())
    throw DomainError(ErrorKind::invalid_argument,
                      "Grid: generator system has rows but no grid point");
  ggs_ = ggs;
  ggs_ok_ = true;
}

void Grid::invalidate() const { minimized_ = false; }

void Grid::set_empty() const {
  min_ = Minimal{};
  min_.empty = true;
  cgs_ = CongruenceSystem(dim_);
  cgs_.insert(Congruence(LinearExpression(1), Coefficient(0)));  // 1 = 0
  ggs_ = GridGeneratorSystem(dim_);
  cgs_ok_ = ggs_ok_ = true;
  minimized_ = true;
}

void Grid::collect_congruence_rows(std::vector<HRow>& eqs,
                                   std::vector<HRow>& mods) const {
  for (const Congruence& cg : cgs_) {
    HRow r(dim_ + 1, Rational());
    const bool eq = cg.is_equality();
    const Rational f =
        eq ? Rational(1) : Rational(cg.modulus(), Coefficient(1));
    for (dim_t i = 0; i < dim_; ++i) {
      const Coefficient& a = cg.coefficient(Variable(i));
      if (!a.is_zero()) r[i] = Rational(a) / f;
    }
    r[dim_] = Rational(cg.inhomogeneous_term()) / f;
    (eq ? eqs : mods).push_back(std::move(r));
  }
}

bool Grid::collect_generator_rows(
    std::vector<Rational>& point, std::vector<std::vector<Rational>>& params,
    std::vector<std::vector<Rational>>& lines) const {
  bool have_point = false;
  for (const GridGenerator& g : ggs_) {
    std::vector<Rational> v(dim_);
    for (dim_t i = 0; i < dim_; ++i) v[i] = g.coordinate(Variable(i));
    switch (g.kind()) {
      case GridGenKind::grid_point:
        if (!have_point) {
          point = std::move(v);
          have_point = true;
        } else {
          // Extra points join in as displacements from the base point.
          for (dim_t i = 0; i < dim_; ++i) v[i] -= point[i];
          if (!is_zero_row(v)) params.push_back(std::move(v));
        }
        break;
      case GridGenKind::parameter:
        params.push_back(std::move(v));
        break;
      case GridGenKind::grid_line:
        lines.push_back(std::move(v));
        break;
    }
  }
  return have_point;
}

void Grid::minimize() const {
  if (minimized_) return;
  assert(cgs_ok_ || ggs_ok_);
  min_ = Minimal{};
  if (cgs_ok_) {
    std::vector<HRow> eqs, mods;
    collect_congruence_rows(eqs, mods);
    if (!reduce_congruence_rows(dim_, eqs, mods)) {
      set_empty();
      return;
    }
    min_.eqs = std::move(eqs);
    min_.mods = std::move(mods);
    generators_from_congruences(dim_, min_.eqs, min_.mods, min_.point,
                                min_.params, min_.lines);
  } else {
    std::vector<Rational> point;
    std::vector<std::vector<Rational>> params, lines;
    if (!collect_generator_rows(point, params, lines)) {
      set_empty();
      return;
    }
    reduce_generator_rows(point, params, lines);
    min_.point = std::move(point);
    min_.params = std::move(params);
    min_.lines = std::move(lines);
    congruences_from_generators(dim_, min_.point, min_.params, min_.lines,
                                min_.eqs, min_.mods);
  }
  cgs_ = render_congruences();
  ggs_ = render_generators();
  cgs_ok_ = ggs_ok_ = true;
  minimized_ = true;
}

void Grid::ensure_congruences() const {
  if (!cgs_ok_) minimize();
}

void Grid::ensure_generators() const {
  if (!ggs_ok_) minimize();
}

CongruenceSystem Grid::render_congruences() const {
  if (min_.empty) {
    CongruenceSystem out(dim_);
    out.insert(Congruence(LinearExpression(1), Coefficient(0)));
    return out;
  }
  return render_cgs(dim_, min_.eqs, min_.mods);
}

GridGeneratorSystem Grid::render_generators() const {
  if (min_.empty) return GridGeneratorSystem(dim_);
  return render_gens(dim_, min_.point, min_.params, min_.lines);
}

dim_t Grid::affine_dim() const {
  minimize();
  if (min_.empty) return 0;
  return min_.params.size() + min_.lines.size();
}

bool Grid::is_empty() const {
  minimize();
  return min_.empty;
}

bool Grid::is_universe() const {
  minimize();
  return !min_.empty && min_.eqs.empty() && min_.mods.empty();
}

bool Grid::is_discrete() const {
  minimize();
  return min_.empty || min_.lines.empty();
}

bool Grid::satisfies_all_rows(const Grid& q) const {
  for (const HRow& r : min_.eqs) {
    if (!affine_value(r, q.min_.point).is_zero()) return false;
    for (const auto& p : q.min_.params)
      if (!direction_value(r, p).is_zero()) return false;
    for (const auto& l : q.min_.lines)
      if (!direction_value(r, l).is_zero()) return false;
  }
  for (const HRow& r : min_.mods) {
    if (!affine_value(r, q.min_.point).is_integer()) return false;
    for (const auto& p : q.min_.params)
      if (!direction_value(r, p).is_integer()) return false;
    for (const auto& l : q.min_.lines)
      if (!direction_value(r, l).is_zero()) return false;
  }
  return true;
}

bool Grid::contains(const Grid& q) const {
  check_dims(q, "Grid::contains");
  if (q.is_empty()) return true;
  if (is_empty()) return false;
  minimize();
  q.minimize();
  return satisfies_all_rows(q);
}

bool Grid::strictly_contains(const Grid& q) const {
  return contains(q) && !equals(q);
}

bool Grid::is_disjoint_from(const Grid& q) const {
  check_dims(q, "Grid::is_disjoint_from");
  Grid t(*this);
  t.intersection_assign(q);
  return t.is_empty();
}

bool Grid::equals(const Grid& q) const {
  check_dims(q, "Grid::equals");
  minimize();
  q.minimize();
  if (min_.empty || q.min_.empty) return min_.empty == q.min_.empty;
  return min_.eqs == q.min_.eqs && min_.mods == q.min_.mods;
}

bool Grid::contains_point(const std::vector<Rational>& coords) const {
  if (coords.size() != dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "Grid::contains_point: wrong coordinate count");
  minimize();
  if (min_.empty) return false;
  for (const HRow& r : min_.eqs)
    if (!affine_value(r, coords).is_zero()) return false;
  for (const HRow& r : min_.mods)
    if (!affine_value(r, coords).is_integer()) return false;
  return true;
}

CongruenceSystem Grid::minimized_congruences() const {
  minimize();
  return cgs_;
}

GridGeneratorSystem Grid::minimized_grid_generators() const {
  minimize();
  return ggs_;
}

CongruenceSystem Grid::congruences() const {
  ensure_congruences();
  return cgs_;
}

GridGeneratorSystem Grid::grid_generators() const {
  ensure_generators();
  return ggs_;
}

void Grid::add_congruence(const Congruence& cg) {
  if (cg.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "Grid::add_congruence: dimension exceeded");
  ensure_congruences();
  cgs_.insert(cg);
  ggs_ok_ = false;
  invalidate();
}

void Grid::add_congruences(const CongruenceSystem& cgs) {
  for (const Congruence& cg : cgs) add_congruence(cg);
}

void Grid::add_grid_generator(const GridGenerator& g) {
  if (g.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "Grid::add_grid_generator: dimension exceeded");
  ensure_generators();
  if (ggs_.empty() && g.kind() != GridGenKind::grid_point)
    throw DomainError(ErrorKind::invalid_argument,
                      "Grid::add_grid_generator: empty grid needs a point");
  ggs_.insert(g);
  cgs_ok_ = false;
  invalidate();
}

void Grid::add_grid_generators(const GridGeneratorSystem& gs) {
  for (const GridGenerator& g : gs) add_grid_generator(g);
}

void Grid::intersection_assign(const Grid& q) {
  check_dims(q, "Grid::intersection_assign");
  ensure_congruences();
  q.ensure_congruences();
  for (const Congruence& cg : q.cgs_) cgs_.insert(cg);
  ggs_ok_ = false;
  invalidate();
}

void Grid::upper_bound_assign(const Grid& q) {
  check_dims(q, "Grid::upper_bound_assign");
  if (q.is_empty()) return;
  if (is_empty()) {
    *this = q;
    return;
  }
  ensure_generators();
  q.ensure_generators();
  for (const GridGenerator& g : q.ggs_) ggs_.insert(g);
  cgs_ok_ = false;
  invalidate();
}

void Grid::grid_difference_assign(const Grid& q) {
  check_dims(q, "Grid::grid_difference_assign");
  if (is_empty() || q.is_empty()) return;
  if (q.contains(*this)) {
    *this = Grid(dim_, true);
    return;
  }
  minimize();
  q.minimize();
  Grid result(dim_, true);
  // Points outside q violate at least one congruence of q, so the hull of
  // the difference is the join over q's rows of what survives each row.
  // Per row, the values r·(x, 1) over *this form β + gZ (or fill the reals
  // when a line meets the row): entirely inside the row's solution set means
  // no contribution; entirely outside means nothing is removed at all; a
  // two-class split keeps exactly the off class; three or more surviving
  // classes regenerate the whole grid, as does pruning one value out of an
  // infinite progression.
  auto handle = [&](const HRow& r, bool equality) -> bool {
    const Rational beta = affine_value(r, min_.point);
    Rational g;
    for (const auto& p : min_.params)
      g = rational_gcd(g, direction_value(r, p));
    bool continuous = false;
    for (const auto& l : min_.lines)
      if (!direction_value(r, l).is_zero()) {
        continuous = true;
        break;
      }
    if (equality) {
      if (continuous || !g.is_zero()) return false;
      return beta.is_zero();  // on the hyperplane: removes nothing here
    }
    if (continuous) return false;
    if (g.is_zero()) return beta.is_integer();
    const Coefficient classes = g.den();
    if (!(beta * Rational(classes)).is_integer()) return false;  // disjoint
    if (classes.is_one()) return true;  // entirely inside the row
    if (!(classes == Coefficient(2))) return false;
    const Rational kept = beta.is_integer() ? beta + g : beta;
    const Rational twog = g + g;
    Coefficient t = common_denominator(r);
    t = Coefficient::lcm(t, kept.den());
    t = Coefficient::lcm(t, twog.den());
    Grid piece(*this);
    piece.add_congruence(Congruence(
        row_expression(r, dim_, t, r[dim_] - kept), scaled_to(twog, t)));
    result.upper_bound_assign(piece);
    return true;
  };
  for (const HRow& r : q.min_.eqs)
    if (!handle(r, true)) return;
  for (const HRow& r : q.min_.mods)
    if (!handle(r, false)) return;
  *this = result;
}

void Grid::time_elapse_assign(const Grid& q) {
  check_dims(q, "Grid::time_elapse_assign");
  if (is_empty()) return;
  if (q.is_empty()) {
    *this = Grid(dim_, true);
    return;
  }
  q.minimize();
  ensure_generators();
  const Rational zero;
  if (!is_zero_row(q.min_.point)) {
    const Coefficient t = common_denominator(q.min_.point);
    ggs_.insert(GridGenerator::parameter(
        row_expression(q.min_.point, dim_, t, zero), t));
  }
  for (const auto& p : q.min_.params) {
    const Coefficient t = common_denominator(p);
    ggs_.insert(GridGenerator::parameter(row_expression(p, dim_, t, zero), t));
  }
  for (const auto& l : q.min_.lines) {
    const Coefficient t = common_denominator(l);
    ggs_.insert(GridGenerator::grid_line(row_expression(l, dim_, t, zero)));
  }
  cgs_ok_ = false;
  invalidate();
}

void Grid::affine_image(Variable v, const LinearExpression& e,
                        const Coefficient& denominator) {
  validate_affine(dim_, v, e, denominator, "Grid::affine_image");
  if (is_empty()) return;
  minimize();
  const Rational den(denominator, Coefficient(1));
  auto transform = [&](std::vector<Rational>& w, bool with_inhom) {
    Rational s = with_inhom ? Rational(e.inhomogeneous_term()) : Rational();
    for (dim_t i = 0; i < dim_; ++i) {
      const Coefficient& a = e.coefficient(Variable(i));
      if (!a.is_zero()) s += Rational(a) * w[i];
    }
    w[v.id()] = s / den;
  };
  std::vector<Rational> point = min_.point;
  transform(point, true);
  std::vector<std::vector<Rational>> params, lines;
  params.reserve(min_.params.size());
  lines.reserve(min_.lines.size());
  for (auto dir : min_.params) {
    transform(dir, false);
    if (!is_zero_row(dir)) params.push_back(std::move(dir));
  }
  for (auto dir : min_.lines) {
    transform(dir, false);
    if (!is_zero_row(dir)) lines.push_back(std::move(dir));
  }
  ggs_ = render_gens(dim_, point, params, lines);
  ggs_ok_ = true;
  cgs_ok_ = false;
  invalidate();
}

void Grid::affine_preimage(Variable v, const LinearExpression& e,
                           const Coefficient& denominator) {
  validate_affine(dim_, v, e, denominator, "Grid::affine_preimage");
  if (is_empty()) return;
  ensure_congruences();
  CongruenceSystem next(dim_);
  for (const Congruence& cg : cgs_) {
    const Coefficient& av = cg.coefficient(v);
    if (av.is_zero()) {
      next.insert(cg);
      continue;
    }
    // Substitute v := e/den and clear the denominator; a proper congruence
    // scales its modulus along.
    LinearExpression ex = cg.expression();
    ex.set_coefficient(v, Coefficient(0));
    ex *= denominator;
    ex += av * e;
    ex.extend_to(dim_);
    next.insert(Congruence(std::move(ex), denominator * cg.modulus()));
  }
  cgs_ = std::move(next);
  cgs_ok_ = true;
  ggs_ok_ = false;
  invalidate();
}

void Grid::generalized_affine_image(Variable v, const LinearExpression& e,
                                    const Coefficient& denominator,
                                    const Coefficient& modulus) {
  validate_affine(dim_, v, e, denominator, "Grid::generalized_affine_image");
  affine_image(v, e, denominator);
  if (modulus.is_zero() || is_empty()) return;
  ensure_generators();
  ggs_.insert(GridGenerator::parameter(modulus * LinearExpression(v)));
  cgs_ok_ = false;
  invalidate();
}

void Grid::generalized_affine_preimage(Variable v, const LinearExpression& e,
                                       const Coefficient& denominator,
                                       const Coefficient& modulus) {
  validate_affine(dim_, v, e, denominator,
                  "Grid::generalized_affine_preimage");
  if (!modulus.is_zero() && !is_empty()) {
    ensure_generators();
    ggs_.insert(GridGenerator::parameter(modulus * LinearExpression(v)));
    cgs_ok_ = false;
    invalidate();
  }
  affine_preimage(v, e, denominator);
}

void Grid::add_space_dimensions_and_embed(dim_t m) {
  if (m == 0) return;
  const dim_t nd = dim_ + m;
  if (is_empty()) {
    *this = Grid(nd, true);
    return;
  }
  ensure_generators();
  GridGeneratorSystem next(nd);
  for (const GridGenerator& g : ggs_) next.insert(g);
  for (dim_t i = dim_; i < nd; ++i)
    next.insert(GridGenerator::grid_line(LinearExpression(Variable(i))));
  ggs_ = std::move(next);
  dim_ = nd;
  cgs_ok_ = false;
  ggs_ok_ = true;
  invalidate();
}

void Grid::add_space_dimensions_and_project(dim_t m) {
  if (m == 0) return;
  const dim_t nd = dim_ + m;
  ensure_congruences();
  CongruenceSystem next(nd);
  for (const Congruence& cg : cgs_) next.insert(cg);
  for (dim_t i = dim_; i < nd; ++i)
    next.insert(Congruence::equality(LinearExpression(Variable(i))));
  cgs_ = std::move(next);
  dim_ = nd;
  cgs_ok_ = true;
  ggs_ok_ = false;
  invalidate();
}

void Grid::remove_space_dimensions(const std::set<dim_t>& dims) {
  if (dims.empty()) return;
  for (dim_t d : dims)
    if (d >= dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "Grid::remove_space_dimensions: dimension exceeded");
  const dim_t nd = dim_ - dims.size();
  if (is_empty()) {
    *this = Grid(nd, true);
    return;
  }
  minimize();
  auto strip = [&](const std::vector<Rational>& v) {
    std::vector<Rational> out;
    out.reserve(nd);
    for (dim_t i = 0; i < dim_; ++i)
      if (!dims.count(i)) out.push_back(v[i]);
    return out;
  };
  std::vector<Rational> point = strip(min_.point);
  std::vector<std::vector<Rational>> params, lines;
  for (const auto& r : min_.params) {
    auto s = strip(r);
    if (!is_zero_row(s)) params.push_back(std::move(s));
  }
  for (const auto& r : min_.lines) {
    auto s = strip(r);
    if (!is_zero_row(s)) lines.push_back(std::move(s));
  }
  dim_ = nd;
  ggs_ = render_gens(nd, point, params, lines);
  ggs_ok_ = true;
  cgs_ok_ = false;
  invalidate();
}

void Grid::remove_higher_space_dimensions(dim_t new_dim) {
  if (new_dim > dim_)
    throw DomainError(
        ErrorKind::dimension_mismatch,
        "Grid::remove_higher_space_dimensions: dimension exceeded");
  std::set<dim_t> dims;
  for (dim_t i = new_dim; i < dim_; ++i) dims.insert(i);
  remove_space_dimensions(dims);
}

void Grid::map_space_dimensions(const std::vector<std::optional<dim_t>>& map,
                                dim_t new_dim) {
  if (map.size() != dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "Grid::map_space_dimensions: map arity mismatch");
  std::vector<char> hit(new_dim, 0);
  std::size_t mapped = 0;
  for (const auto& t : map) {
    if (!t) continue;
    if (*t >= new_dim || hit[*t])
      throw DomainError(ErrorKind::invalid_argument,
                        "Grid::map_space_dimensions: map not injective");
    hit[*t] = 1;
    ++mapped;
  }
  if (mapped != new_dim)
    throw DomainError(ErrorKind::invalid_argument,
                      "Grid::map_space_dimensions: map not onto");
  if (is_empty()) {
    *this = Grid(new_dim, true);
    return;
  }
  minimize();
  auto remap = [&](const std::vector<Rational>& v) {
    std::vector<Rational> out(new_dim);
    for (dim_t i = 0; i < dim_; ++i)
      if (map[i]) out[*map[i]] = v[i];
    return out;
  };
  std::vector<Rational> point = remap(min_.point);
  std::vector<std::vector<Rational>> params, lines;
  for (const auto& r : min_.params) {
    auto s = remap(r);
    if (!is_zero_row(s)) params.push_back(std::move(s));
  }
  for (const auto& r : min_.lines) {
    auto s = remap(r);
    if (!is_zero_row(s)) lines.push_back(std::move(s));
  }
  dim_ = new_dim;
  ggs_ = render_gens(new_dim, point, params, lines);
  ggs_ok_ = true;
  cgs_ok_ = false;
  invalidate();
}

void Grid::concatenate_assign(const Grid& q) {
  const dim_t nd = dim_ + q.dim_;
  if (is_empty() || q.is_empty()) {
    *this = Grid(nd, true);
    return;
  }
  minimize();
  q.minimize();
  auto pad = [&](const std::vector<Rational>& v, dim_t at) {
    std::vector<Rational> out(nd);
    for (std::size_t i = 0; i < v.size(); ++i) out[at + i] = v[i];
    return out;
  };
  std::vector<Rational> point(nd);
  for (dim_t i = 0; i < dim_; ++i) point[i] = min_.point[i];
  for (dim_t i = 0; i < q.dim_; ++i) point[dim_ + i] = q.min_.point[i];
  std::vector<std::vector<Rational>> params, lines;
  for (const auto& r : min_.params) params.push_back(pad(r, 0));
  for (const auto& r : q.min_.params) params.push_back(pad(r, dim_));
  for (const auto& r : min_.lines) lines.push_back(pad(r, 0));
  for (const auto& r : q.min_.lines) lines.push_back(pad(r, dim_));
  dim_ = nd;
  ggs_ = render_gens(nd, point, params, lines);
  ggs_ok_ = true;
  cgs_ok_ = false;
  invalidate();
}

void Grid::widening_grid_assign(const Grid& q, unsigned* tokens) {
  check_dims(q, "Grid::widening_grid_assign");
  if (q.is_empty()) return;
  if (is_empty()) {
    *this = q;
    return;
  }
  minimize();
  q.minimize();
  auto q_satisfies = [&](const HRow& r, bool equality) {
    const Rational at_point = affine_value(r, q.min_.point);
    if (equality ? !at_point.is_zero() : !at_point.is_integer()) return false;
    for (const auto& p : q.min_.params) {
      const Rational s = direction_value(r, p);
      if (equality ? !s.is_zero() : !s.is_integer()) return false;
    }
    for (const auto& l : q.min_.lines)
      if (!direction_value(r, l).is_zero()) return false;
    return true;
  };
  std::vector<HRow> keep_eqs, keep_mods;
  for (const HRow& r : min_.eqs)
    if (q_satisfies(r, true)) keep_eqs.push_back(r);
  for (const HRow& r : min_.mods)
    if (q_satisfies(r, false)) keep_mods.push_back(r);
  if (keep_eqs.size() == min_.eqs.size() &&
      keep_mods.size() == min_.mods.size())
    return;  // every congruence survives: p already covers q
  if (tokens && *tokens > 0) {
    --*tokens;
    *this = q;
    return;
  }
  cgs_ = render_cgs(dim_, keep_eqs, keep_mods);
  cgs_ok_ = true;
  ggs_ok_ = false;
  invalidate();
}

void Grid::check_dims(const Grid& q, const char* op) const {
  if (dim_ != q.dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      std::string(op) + ": space dimensions differ");
}

std::string Grid::ascii_dump() const {
  std::ostringstream os;
  os << "dim " << dim_ << " cgs_ok " << cgs_ok_ << " ggs_ok " << ggs_ok_
     << " minimized " << minimized_ << '\n';
  if (cgs_ok_) {
    os << "congruences:\n";
    for (const Congruence& cg : cgs_) os << "  " << cg.to_string() << '\n';
  }
  if (ggs_ok_) {
    os << "grid generators:\n";
    for (const GridGenerator& g : ggs_) os << "  " << g.to_string() << '\n';
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Grid& g) {
  if (g.is_empty()) return os << "false";
  const CongruenceSystem cgs = g.minimized_congruences();
  if (cgs.empty()) return os << "true";
  bool first = true;
  for (const Congruence& cg : cgs) {
    if (!first) os << ", ";
    first = false;
    os << cg.to_string();
  }
  return os;
}

}  // namespace polydom
