// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/powerset.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "polydom/polyhedron.hpp"

using namespace polydom;

namespace {

const Variable x(0), y(1);

Polyhedron interval(long lo, long hi) {
  ConstraintSystem cs(1);
  cs.insert(x >= lo);
  cs.insert(x <= hi);
  return Polyhedron(cs);
}

Polyhedron halfline(long lo) {
  ConstraintSystem cs(1);
  cs.insert(x >= lo);
  return Polyhedron(cs);
}

using PSet = Powerset<Polyhedron>;

PSet pset(std::initializer_list<Polyhedron> ds, dim_t dim = 1) {
  PSet ps(dim);
  for (const Polyhedron& d : ds) ps.add_disjunct(d);
  return ps;
}

void h79(Polyhedron& a, const Polyhedron& b) { a.widening_h79_assign(b); }

auto poly_cert = [](const Polyhedron& p) { return p.widening_certificate(); };

// Non-numerical instantiation: subsets of a small token alphabet ordered by
// inclusion. space_dimension is a tag so mixed "dimensions" still throw.
struct TokenSet {
  std::set<char> toks;
  dim_t tag = 0;

  TokenSet() = default;
  TokenSet(std::initializer_list<char> cs, dim_t t = 0) : toks(cs), tag(t) {}

  dim_t space_dimension() const { return tag; }
  bool is_empty() const { return toks.empty(); }
  bool contains(const TokenSet& o) const {
    return std::includes(toks.begin(), toks.end(), o.toks.begin(),
                         o.toks.end());
  }
  bool equals(const TokenSet& o) const { return toks == o.toks; }
  void intersection_assign(const TokenSet& o) {
    std::set<char> out;
    std::set_intersection(toks.begin(), toks.end(), o.toks.begin(),
                          o.toks.end(), std::inserter(out, out.begin()));
    toks = std::move(out);
  }
  void upper_bound_assign(const TokenSet& o) {
    toks.insert(o.toks.begin(), o.toks.end());
  }
  friend std::ostream& operator<<(std::ostream& os, const TokenSet& t) {
    for (char c : t.toks) os << c;
    return os;
  }
};

constexpr const char* kAlphabet = "abcdef";

TokenSet random_tokens(std::mt19937& rng) {
  TokenSet t;
  for (const char* c = kAlphabet; *c; ++c)
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) t.toks.insert(*c);
  return t;
}

using TSet = Powerset<TokenSet>;

}  // namespace

TEST_CASE("insertion keeps collections omega-reduced") {
  PSet ps(1);
  CHECK(ps.is_bottom());
  ps.add_disjunct(interval(0, 1));
  ps.add_disjunct(interval(0, 2));  // absorbs the first
  CHECK(ps.size() == 1);
  CHECK(ps[0].equals(interval(0, 2)));

  ps.add_disjunct(Polyhedron::empty(1));  // bottom disjuncts are dropped
  CHECK(ps.size() == 1);

  ps.add_disjunct(interval(1, 2));  // entailed, dropped
  CHECK(ps.size() == 1);
  ps.add_disjunct(interval(5, 6));  // incomparable, kept
  CHECK(ps.size() == 2);

  // Incomparable overlapping boxes both survive in two dimensions.
  ConstraintSystem a(2), b(2);
  a.insert(x <= 1);
  b.insert(y <= 1);
  PSet qs(2);
  qs.add_disjunct(Polyhedron(a));
  qs.add_disjunct(Polyhedron(b));
  CHECK(qs.size() == 2);

  CHECK_THROWS_AS(ps.add_disjunct(Polyhedron::universe(2)), DomainError);
}

TEST_CASE("omega-reduction is idempotent and order-independent") {
  std::mt19937 rng(333);
  for (int round = 0; round < 120; ++round) {
    std::vector<TokenSet> pool;
    const int n = 1 + round % 6;
    for (int i = 0; i < n; ++i) pool.push_back(random_tokens(rng));
    TSet fwd(0), rev(0), shuffled(0);
    for (const TokenSet& t : pool) fwd.add_disjunct(t);
    for (auto it = pool.rbegin(); it != pool.rend(); ++it)
      rev.add_disjunct(*it);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (const TokenSet& t : pool) shuffled.add_disjunct(t);
    CHECK(fwd.equals(rev));
    CHECK(fwd.equals(shuffled));
    TSet again = fwd;
    again.omega_reduce();
    CHECK(again.equals(fwd));
    // No disjunct entails another.
    for (std::size_t i = 0; i < fwd.size(); ++i)
      for (std::size_t j = 0; j < fwd.size(); ++j)
        if (i != j) CHECK(!fwd[i].contains(fwd[j]));
  }
}

TEST_CASE("meet and upper bound obey the lattice contracts") {
  PSet m = pset({interval(0, 2)});
  m.meet_assign(pset({interval(1, 3)}));
  CHECK(m.equals(pset({interval(1, 2)})));

  CHECK(pset({interval(0, 1)})
            .entails(pset({interval(0, 2), interval(5, 6)})));
  CHECK(!pset({interval(0, 1), interval(5, 6)})
             .entails(pset({interval(0, 2)})));

  PSet u = pset({interval(0, 1)});
  u.upper_bound_assign(pset({interval(2, 3)}));
  CHECK(u.size() == 2);  // kept disjoint: precision over hulling
  CHECK(u.equals(pset({interval(0, 1), interval(2, 3)})));

  // Disjoint meets collapse to bottom.
  PSet e = pset({interval(0, 1)});
  e.meet_assign(pset({interval(3, 4)}));
  CHECK(e.is_bottom());

  CHECK_THROWS_AS(u.meet_assign(PSet(2)), DomainError);
  CHECK_THROWS_AS(u.upper_bound_assign(PSet(2)), DomainError);
  CHECK_THROWS_AS((void)u.entails(PSet(2)), DomainError);
}

TEST_CASE("token-alphabet instantiation passes the lattice property suite") {
  std::mt19937 rng(5150);
  auto random_pset = [&](int maxn) {
    TSet ps(0);
    const int n = std::uniform_int_distribution<int>(0, maxn)(rng);
    for (int i = 0; i < n; ++i) ps.add_disjunct(random_tokens(rng));
    return ps;
  };
  for (int round = 0; round < 150; ++round) {
    const TSet a = random_pset(4), b = random_pset(4), c = random_pset(3);

    CHECK(a.entails(a));
    TSet ab = a;
    ab.upper_bound_assign(b);
    CHECK(a.entails(ab));
    CHECK(b.entails(ab));
    TSet ba = b;
    ba.upper_bound_assign(a);
    CHECK(ab.equals(ba));

    TSet am = a;
    am.meet_assign(b);
    CHECK(am.entails(a));
    CHECK(am.entails(b));
    TSet bm = b;
    bm.meet_assign(a);
    CHECK(am.equals(bm));

    // Transitivity sample: a ⊑ a⊔b ⊑ (a⊔b)⊔c.
    TSet abc = ab;
    abc.upper_bound_assign(c);
    CHECK(a.entails(abc));

    // Absorption: a ⊓ (a ⊔ b) = a.
    TSet absorb = ab;
    absorb.meet_assign(a);
    CHECK(absorb.equals(a));

    // Mutual entailment coincides with set equality once omega-reduced.
    CHECK((a.entails(b) && b.entails(a)) == a.equals(b));

    // Meet against the pointwise oracle.
    TSet oracle(0);
    for (const TokenSet& d : a)
      for (const TokenSet& e : b) {
        TokenSet mm = d;
        mm.intersection_assign(e);
        if (!mm.is_empty()) oracle.add_disjunct(mm);
      }
    CHECK(am.equals(oracle));
  }
}

TEST_CASE("pairwise reduction trades precision for size") {
  PSet ps = pset({interval(0, 1), interval(5, 6), interval(9, 9)});
  PSet copy = ps;
  copy.pairwise_reduce(3);
  CHECK(copy.equals(ps));  // already small enough
  copy.pairwise_reduce(2);
  CHECK(copy.size() == 2);
  CHECK(ps.entails(copy));
  copy.pairwise_reduce(1);
  REQUIRE(copy.size() == 1);
  CHECK(copy[0].equals(interval(0, 9)));
}

TEST_CASE("bgp99 extrapolation widens matched pairs and caps the size") {
  // Single matched pair: plain base widening.
  PSet ps = pset({interval(0, 1)});
  ps.bgp99_extrapolation_assign(pset({interval(0, 2)}), h79);
  CHECK(ps.equals(PSet(halfline(0))));

  // Stability: ps = qs widens every disjunct against itself.
  PSet st = pset({interval(0, 1), interval(5, 6)});
  st.bgp99_extrapolation_assign(pset({interval(0, 1), interval(5, 6)}), h79);
  CHECK(st.equals(pset({interval(0, 1), interval(5, 6)})));

  // Unmatched disjuncts of the newer collection pass through.
  PSet pass = pset({interval(0, 1)});
  pass.bgp99_extrapolation_assign(pset({interval(0, 1), interval(5, 6)}),
                                  h79);
  CHECK(pass.equals(pset({interval(0, 1), interval(5, 6)})));

  // max_disjuncts = 1 forces the hull.
  PSet forced = pset({interval(0, 1), interval(5, 6)});
  forced.bgp99_extrapolation_assign(pset({interval(0, 1), interval(5, 6)}),
                                    h79, 1);
  REQUIRE(forced.size() == 1);
  CHECK(forced[0].equals(interval(0, 6)));

  // Precondition violations are reported, not silently absorbed.
  PSet bad = pset({interval(5, 6)});
  CHECK_THROWS_AS(bad.bgp99_extrapolation_assign(pset({interval(0, 1)}), h79),
                  DomainError);

  // The result is an upper bound for the newer collection.
  std::mt19937 rng(9219);
  std::uniform_int_distribution<long> lo(-8, 8), len(0, 5);
  for (int round = 0; round < 80; ++round) {
    PSet small(1), grown(1);
    for (int i = 0; i < 3; ++i) {
      const long a = lo(rng), n = len(rng);
      Polyhedron d = interval(a, a + n);
      Polyhedron g = interval(a - len(rng), a + n + len(rng));
      small.add_disjunct(d);
      grown.add_disjunct(g);
    }
    grown.upper_bound_assign(small);  // ensure small ⊑ grown
    PSet w = small;
    w.bgp99_extrapolation_assign(grown, h79, 8);
    CHECK(grown.entails(w));
    CHECK(small.entails(w));
  }
}

TEST_CASE("certificate widening adopts certified progress or collapses") {
  // Stability.
  PSet st = pset({interval(0, 1), interval(4, 5)});
  st.certificate_widening_assign(pset({interval(0, 1), interval(4, 5)}), h79,
                                 poly_cert);
  CHECK(st.equals(pset({interval(0, 1), interval(4, 5)})));

  // From bottom: adopt the newer collection.
  PSet bot(1);
  bot.certificate_widening_assign(pset({interval(0, 1)}), h79, poly_cert);
  CHECK(bot.equals(pset({interval(0, 1)})));

  // Affine dimension grew: the certificate multiset drops and q is adopted.
  PSet pt = pset({interval(0, 0)});
  pt.certificate_widening_assign(pset({interval(0, 1)}), h79, poly_cert);
  CHECK(pt.equals(pset({interval(0, 1)})));

  // Same certificates on both sides: collapse and widen the collapses.
  PSet gr = pset({interval(0, 1)});
  gr.certificate_widening_assign(pset({interval(0, 2)}), h79, poly_cert);
  CHECK(gr.equals(PSet(halfline(0))));

  // A new same-certificate disjunct is not certified progress (that way
  // lies an infinite splitting chain): the collapse branch fires.
  PSet split = pset({interval(0, 1)});
  split.certificate_widening_assign(pset({interval(0, 1), interval(2, 3)}),
                                    h79, poly_cert);
  CHECK(split.equals(PSet(halfline(0))));

  CHECK_THROWS_AS(
      st.certificate_widening_assign(PSet(2), h79, poly_cert),
      DomainError);
}

TEST_CASE("certificate widening stabilizes every ascending chain") {
  // 64-step chains mixing growth, splits, and merges; iterate the usual
  // analysis loop a := a widen (a ⊔ step) and demand an early fixpoint.
  std::mt19937 rng(20203);
  std::uniform_int_distribution<long> lo(-30, 30), len(0, 4);
  for (int chain = 0; chain < 30; ++chain) {
    PSet a = pset({interval(lo(rng), lo(rng) + 60)});
    int changes = 0;
    for (int step = 0; step < 64; ++step) {
      const long s = lo(rng);
      PSet next = a;
      next.upper_bound_assign(pset({interval(s, s + len(rng))}));
      PSet widened = a;
      widened.certificate_widening_assign(next, h79, poly_cert);
      CHECK(next.entails(widened));
      if (!widened.equals(a)) {
        a = widened;
        ++changes;
      }
    }
    // One-dimensional certificates only step down a handful of times.
    CHECK(changes <= 8);
    PSet probe = a;
    probe.certificate_widening_assign(a, h79, poly_cert);
    CHECK(probe.equals(a));
  }

  // The toy domain converges too, with its own certificate and widening.
  auto token_cert = [](const TokenSet& t) {
    return std::string(kAlphabet).size() - t.toks.size();
  };
  auto token_widen = [](TokenSet& a, const TokenSet& b) {
    if (!a.equals(b))
      for (const char* c = kAlphabet; *c; ++c) a.toks.insert(*c);
  };
  std::mt19937 trng(77);
  for (int chain = 0; chain < 40; ++chain) {
    TSet a(0);
    a.add_disjunct(random_tokens(trng));
    int changes = 0;
    for (int step = 0; step < 64; ++step) {
      TSet next = a;
      next.add_disjunct(random_tokens(trng));
      if (next.is_bottom()) continue;
      TSet widened = a;
      widened.certificate_widening_assign(next, token_widen, token_cert);
      CHECK(next.entails(widened));
      if (!widened.equals(a)) {
        a = widened;
        ++changes;
      }
    }
    CHECK(changes <= 7);  // |alphabet| + 1 certificate levels at most
  }
}

TEST_CASE("textual form wraps the disjunct stream output") {
  CHECK(PSet(1).to_string() == "{ }");
  TSet ts(0);
  ts.add_disjunct(TokenSet({'a', 'b'}));
  CHECK(ts.to_string() == "{ ab }");
  ts.add_disjunct(TokenSet({'c'}));
  const std::string s = ts.to_string();
  const bool either = s == "{ ab, c }" || s == "{ c, ab }";
  CHECK(either);
}
