// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Bound families and shortest-path closure shared by the weakly relational
// domains (bounded differences, octagons). A family fixes how matrix entries
// are represented: exact rationals extended with +infinity, or checked 64-bit
// integers with a sentinel infinity where every addition is overflow-checked.
// The shape classes are templates over the family, so one algorithm body
// serves both the exact and the fast path.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "polydom/core.hpp"
#include "polydom/kernels/dbm_closure.hpp"
#include "polydom/linear_forms.hpp"

namespace polydom {

// Exact bounds. Halving is lossless, so the octagonal strengthening step
// introduces no rounding, and imports from rationals are identities.
struct RationalBounds {
  using Bound = ExtendedBound;
  static constexpr bool integral = false;

  static Bound infinity() { return ExtendedBound::plus_infinity(); }
  static Bound zero() { return ExtendedBound(Rational(0)); }
  static bool is_finite(const Bound& b) { return b.is_finite(); }
  static bool eq(const Bound& a, const Bound& b) { return a.compare(b) == 0; }
  static bool lt(const Bound& a, const Bound& b) { return a.compare(b) < 0; }
  static bool le(const Bound& a, const Bound& b) { return a.compare(b) <= 0; }
  static Bound add(const Bound& a, const Bound& b) { return a + b; }
  static Bound add_rational(const Bound& a, const Rational& q) {
    return a.is_finite() ? Bound(a.value() + q) : a;
  }
  static Bound half_sum(const Bound& a, const Bound& b) {
    if (!a.is_finite() || !b.is_finite()) return infinity();
    return Bound((a.value() + b.value()) / Rational(2));
  }
  static Bound even_down(const Bound& b) { return b; }
  static Bound from_rational(const Rational& q) { return Bound(q); }
  static Rational to_rational(const Bound& b) { return b.value(); }
  static std::string to_string(const Bound& b) { return b.to_string(); }
};

// Fast bounds: int64 with kernels::kInf64 as +infinity. Sums that leave the
// representable range raise ErrorKind::overflow instead of wrapping. Imports
// from rationals round up: a looser upper bound is sound. Halving rounds
// down, which matches the integer reading of octagonal constraints; exact
// agreement with the rational family therefore holds on even entries, and
// that is what closure guarantees before any halving happens.
struct CheckedInt64Bounds {
  using Bound = std::int64_t;
  static constexpr bool integral = true;

  static Bound infinity() { return kernels::kInf64; }
  static Bound zero() { return 0; }
  static bool is_finite(Bound b) { return b != kernels::kInf64; }
  static bool eq(Bound a, Bound b) { return a == b; }
  static bool lt(Bound a, Bound b) { return a < b; }
  static bool le(Bound a, Bound b) { return a <= b; }
  static Bound add(Bound a, Bound b) {
    if (a == kernels::kInf64 || b == kernels::kInf64) return kernels::kInf64;
    Bound r;
    // A legitimate sum equal to the sentinel would be indistinguishable from
    // +infinity, so it counts as overflow too.
    if (__builtin_add_overflow(a, b, &r) || r == kernels::kInf64)
      throw_overflow("int64 bound addition");
    return r;
  }
  static Bound add_rational(Bound a, const Rational& q) {
    if (a == kernels::kInf64) return a;
    return add(a, from_rational(q));
  }
  // Floor of the exact half. The arithmetic shift is well defined on
  // negatives and cannot underflow the way (s - 1) / 2 would at the low end.
  static Bound half_sum(Bound a, Bound b) {
    if (a == kernels::kInf64 || b == kernels::kInf64) return kernels::kInf64;
    Bound s;
    if (__builtin_add_overflow(a, b, &s)) throw_overflow("int64 bound addition");
    return s >> 1;
  }
  // Largest even value <= b; tightens the unary rows of integral octagons.
  static Bound even_down(Bound b) {
    if (b == kernels::kInf64) return b;
    return b - (b & 1);
  }
  static Bound from_rational(const Rational& q) {
    Coefficient c = q.ceil();
    if (!c.fits_int64()) throw_overflow("rational bound exceeds int64");
    Bound b = c.to_int64();
    if (b == kernels::kInf64) throw_overflow("rational bound exceeds int64");
    return b;
  }
  static Rational to_rational(Bound b) {
    return Rational(Coefficient(static_cast<long>(b)));
  }
  static std::string to_string(Bound b) {
    return b == kernels::kInf64 ? "+infty" : std::to_string(b);
  }
};

// How a shape treats a constraint outside its carrier: silently keep the
// over-approximation that drops it, or refuse.
enum class ShapePolicy { over_approximate, reject };

// A linear expression e, read as the inequality e >= 0, recognized when at
// most two variables occur and, when two do, their coefficients have equal
// magnitude. The result states the equivalent normalized inequality
//
//   sign[0]*var[0] + sign[1]*var[1] <= bound        (signs are +-1)
//
// Returns nullopt for anything else, including constant expressions:
// tautology and inconsistency are the caller's business.
struct UnitPattern {
  std::size_t count = 0;
  dim_t var[2] = {0, 0};
  int sign[2] = {0, 0};
  Rational bound;
};

inline std::optional<UnitPattern> unit_pattern(const LinearExpression& e) {
  UnitPattern p;
  Coefficient mag;
  for (dim_t d = 0; d < e.space_dimension(); ++d) {
    const Coefficient& a = e.coefficient(Variable(d));
    if (a.is_zero()) continue;
    if (p.count == 2) return std::nullopt;
    Coefficient abs_a = a.sign() < 0 ? -a : a;
    if (p.count == 0)
      mag = std::move(abs_a);
    else if (!(abs_a == mag))
      return std::nullopt;
    p.var[p.count] = d;
    p.sign[p.count] = -a.sign();  // e >= 0 puts the variables on the <= side
    ++p.count;
  }
  if (p.count == 0) return std::nullopt;
  p.bound = Rational(e.inhomogeneous_term(), mag);
  return p;
}

// Interval of (e + inhomogeneous) / den over a box, with nullopt encoding an
// unbounded side. Requires den > 0; callers normalize the sign first.
struct EvalInterval {
  std::optional<Rational> lo, hi;
};

inline EvalInterval evaluate_interval(
    const LinearExpression& e, const Coefficient& den,
    const std::vector<std::optional<Rational>>& var_lo,
    const std::vector<std::optional<Rational>>& var_hi) {
  EvalInterval r;
  r.lo = Rational(e.inhomogeneous_term());
  r.hi = r.lo;
  for (dim_t d = 0; d < e.space_dimension(); ++d) {
    const Coefficient& a = e.coefficient(Variable(d));
    if (a.is_zero()) continue;
    Rational qa(a);
    const auto& up = qa.sign() > 0 ? var_hi[d] : var_lo[d];
    const auto& down = qa.sign() > 0 ? var_lo[d] : var_hi[d];
    if (r.hi) r.hi = up ? std::optional<Rational>(*r.hi + qa * *up) : std::nullopt;
    if (r.lo) r.lo = down ? std::optional<Rational>(*r.lo + qa * *down) : std::nullopt;
    if (!r.lo && !r.hi) break;
  }
  Rational qden(den);
  if (r.lo) r.lo = *r.lo / qden;
  if (r.hi) r.hi = *r.hi / qden;
  return r;
}

// In-place min-plus (Floyd-Warshall) closure of a k-by-k bound matrix.
// Returns false when a diagonal entry turns negative: the constraint graph
// has a negative cycle and the system is unsatisfiable (entries are then
// meaningful only as evidence). The checked-int64 family runs the runtime
// selected kernel on a scratch copy, so an overflow unwind leaves the input
// matrix intact; the generic loop polls the computation budget and copies
// the pivot-column entry by value because row i may alias row h.
template <typename F>
bool shortest_path_closure(std::vector<typename F::Bound>& m, std::size_t k) {
  using Bound = typename F::Bound;
  if constexpr (std::is_same_v<F, CheckedInt64Bounds>) {
    std::vector<std::int64_t> scratch(m);
    if (kernels::run_closure(scratch.data(), k) == kernels::ClosureStatus::overflow)
      throw_overflow("difference-bound closure");
    m = std::move(scratch);
  } else {
    for (std::size_t h = 0; h < k; ++h) {
      for (std::size_t i = 0; i < k; ++i) {
        budget_checkpoint();
        const Bound m_ih = m[i * k + h];
        if (!F::is_finite(m_ih)) continue;
        for (std::size_t j = 0; j < k; ++j) {
          const Bound& m_hj = m[h * k + j];
          if (!F::is_finite(m_hj)) continue;
          Bound sum = F::add(m_ih, m_hj);
          if (F::lt(sum, m[i * k + j])) m[i * k + j] = std::move(sum);
        }
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    if (F::lt(m[i * k + i], F::zero())) return false;
  return true;
}

}  // namespace polydom
