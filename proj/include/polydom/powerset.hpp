// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Finite powersets: a disjunction kept as a finite sequence of non-bottom,
// pairwise-incomparable ("omega-reduced") elements of an underlying domain D.
// D supplies a handful of methods — space_dimension, is_empty, contains,
// equals, intersection_assign, upper_bound_assign, and stream output — which
// every domain in this library implements; any other type with the same
// surface (including non-numerical ones) instantiates the template equally
// well.
//
// Entailment between collections is the Hoare order: each disjunct of the
// smaller collection must be contained in some disjunct of the larger one.
// For omega-reduced collections mutual entailment coincides with set equality
// of the disjuncts, which is what equals() decides.
//
// Widening support is split in two:
//  - bgp99_extrapolation_assign pairs every current disjunct with the first
//    disjunct of the newer collection containing it, applies the base
//    widening to each pair, passes unmatched newer disjuncts through, and
//    then trades precision for size until at most max_disjuncts remain.
//  - certificate_widening_assign compares the multisets of per-disjunct
//    convergence certificates in the Dershowitz–Manna order (for a totally
//    ordered certificate this is the lexicographic order on the multisets
//    sorted descending, a shorter collection ranking below its extensions).
//    A strict multiset decrease certifies progress and the newer collection
//    is adopted as is; otherwise both sides are collapsed to their upper
//    bound and the base widening runs on the pair, after which every further
//    step is a single-disjunct base widening and the base certificate itself
//    must decrease. Either way the lifted sequence stabilizes.

#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polydom/core.hpp"
#include "polydom/linear_forms.hpp"

namespace polydom {

template <typename D>
class Powerset {
 public:
  using Disjunct = D;

  // The bottom collection: no disjuncts.
  explicit Powerset(dim_t dim = 0) : dim_(dim) {}
  static Powerset bottom(dim_t dim) { return Powerset(dim); }

  // Singleton collection (or bottom, when the element is itself bottom).
  explicit Powerset(D d) : dim_(d.space_dimension()) {
    add_disjunct(std::move(d));
  }

  dim_t space_dimension() const { return dim_; }
  bool is_bottom() const { return ds_.empty(); }
  std::size_t size() const { return ds_.size(); }
  const D& operator[](std::size_t i) const { return ds_[i]; }
  auto begin() const { return ds_.begin(); }
  auto end() const { return ds_.end(); }

  // Insert one disjunct, dropping it or any newly entailed elements so the
  // collection stays omega-reduced. Bottom elements are ignored.
  void add_disjunct(D d) {
    if (d.space_dimension() != dim_)
      throw DomainError(ErrorKind::dimension_mismatch,
                        "Powerset::add_disjunct: dimension mismatch");
    insert_reduced(std::move(d));
  }

  // Re-establish omega-reduction from scratch. Every mutator already
  // maintains the invariant; this is the idempotent scrub used by stress
  // tests and by callers that edited disjuncts in place.
  void omega_reduce() {
    std::vector<D> old;
    old.swap(ds_);
    for (D& d : old) insert_reduced(std::move(d));
  }

  // Hoare entailment: every disjunct lies inside some disjunct of q.
  bool entails(const Powerset& q) const {
    check_dims(q, "Powerset::entails");
    for (const D& d : ds_) {
      bool below = false;
      for (const D& e : q.ds_) {
        budget_checkpoint();
        if (e.contains(d)) {
          below = true;
          break;
        }
      }
      if (!below) return false;
    }
    return true;
  }

  // Set equality of the disjunct collections (order-insensitive). Disjuncts
  // of an omega-reduced collection are pairwise distinct, so any-match
  // counting is enough.
  bool equals(const Powerset& q) const {
    check_dims(q, "Powerset::equals");
    if (ds_.size() != q.ds_.size()) return false;
    for (const D& d : ds_) {
      bool found = false;
      for (const D& e : q.ds_)
        if (e.equals(d)) {
          found = true;
          break;
        }
      if (!found) return false;
    }
    return true;
  }
  bool operator==(const Powerset& q) const { return equals(q); }

  // Join: concatenate and reduce.
  void upper_bound_assign(const Powerset& q) {
    check_dims(q, "Powerset::upper_bound_assign");
    for (const D& e : q.ds_) insert_reduced(D(e));
  }

  // Meet: all pairwise meets, dropping bottoms, then reduce.
  void meet_assign(const Powerset& q) {
    check_dims(q, "Powerset::meet_assign");
    std::vector<D> old;
    old.swap(ds_);
    for (const D& d : old)
      for (const D& e : q.ds_) {
        budget_checkpoint();
        D m(d);
        m.intersection_assign(e);
        insert_reduced(std::move(m));
      }
  }

  // Shrink to at most max_disjuncts by repeatedly replacing the two front
  // disjuncts with their upper bound. The domain signature cannot tell an
  // exact join from a lossy one, so every merge is taken as a precision/size
  // trade; merging by sequence position keeps the operator deterministic.
  void pairwise_reduce(std::size_t max_disjuncts) {
    if (max_disjuncts == 0) max_disjuncts = 1;
    while (ds_.size() > max_disjuncts) {
      budget_checkpoint();
      D merged = std::move(ds_[0]);
      merged.upper_bound_assign(ds_[1]);
      ds_.erase(ds_.begin(), ds_.begin() + 2);
      insert_reduced(std::move(merged));
    }
  }

  // Extrapolation of [BultanGP99]: pair each current disjunct with the first
  // disjunct of q containing it (q is the newer, larger collection), widen
  // the pairs with `widen`, pass unmatched disjuncts of q through, and
  // reduce to at most max_disjuncts.
  template <typename Widen>
  void bgp99_extrapolation_assign(const Powerset& q, Widen&& widen,
                                  std::size_t max_disjuncts = 8) {
    check_dims(q, "Powerset::bgp99_extrapolation_assign");
    Powerset result(dim_);
    std::vector<bool> matched(q.ds_.size(), false);
    for (D& d : ds_) {
      std::size_t j = q.ds_.size();
      for (std::size_t k = 0; k < q.ds_.size(); ++k)
        if (q.ds_[k].contains(d)) {
          j = k;
          break;
        }
      if (j == q.ds_.size())
        throw DomainError(ErrorKind::invalid_argument,
                          "Powerset::bgp99_extrapolation_assign: collection "
                          "is not entailed by the argument");
      matched[j] = true;
      widen(d, q.ds_[j]);
      result.insert_reduced(std::move(d));
    }
    for (std::size_t k = 0; k < q.ds_.size(); ++k)
      if (!matched[k]) result.insert_reduced(D(q.ds_[k]));
    result.pairwise_reduce(max_disjuncts);
    *this = std::move(result);
  }

  // Certificate-lifted widening: adopt q outright when its certificate
  // multiset strictly decreased, otherwise collapse both sides and widen the
  // collapses. `certificate` maps a disjunct to a value in a total
  // well-founded order; the base widening must strictly decrease it unless
  // its result equals its second argument.
  template <typename Widen, typename Certificate>
  void certificate_widening_assign(const Powerset& q, Widen&& widen,
                                   Certificate&& certificate) {
    check_dims(q, "Powerset::certificate_widening_assign");
    if (ds_.empty() || equals(q)) {
      *this = q;
      return;
    }
    using Cert = decltype(certificate(std::declval<const D&>()));
    auto certs = [&](const std::vector<D>& v) {
      std::vector<Cert> cs;
      cs.reserve(v.size());
      for (const D& d : v) cs.push_back(certificate(d));
      std::sort(cs.begin(), cs.end(), [](const Cert& a, const Cert& b) {
        return b < a;  // descending
      });
      return cs;
    };
    const std::vector<Cert> cp = certs(ds_), cq = certs(q.ds_);
    if (std::lexicographical_compare(cq.begin(), cq.end(), cp.begin(),
                                     cp.end())) {
      *this = q;
      return;
    }
    D mine = collapse(ds_);
    widen(mine, collapse(q.ds_));
    Powerset result(dim_);
    result.insert_reduced(std::move(mine));
    *this = std::move(result);
  }

  // "{ d1, d2, … }" over the elements' stream output; bottom prints "{ }".
  std::string to_string() const {
    std::ostringstream os;
    os << "{ ";
    for (std::size_t i = 0; i < ds_.size(); ++i) {
      if (i > 0) os << ", ";
      os << ds_[i];
    }
    os << (ds_.empty() ? "}" : " }");
    return os.str();
  }

 private:
  dim_t dim_;
  std::vector<D> ds_;

  void check_dims(const Powerset& q, const char* op) const {
    if (dim_ != q.dim_) throw DomainError(ErrorKind::dimension_mismatch, op);
  }

  // Omega-reducing insertion: drop d if entailed, drop what d entails.
  void insert_reduced(D d) {
    if (d.is_empty()) return;
    for (const D& e : ds_) {
      budget_checkpoint();
      if (e.contains(d)) return;
    }
    std::erase_if(ds_, [&](const D& e) { return d.contains(e); });
    ds_.push_back(std::move(d));
  }

  static D collapse(const std::vector<D>& v) {
    D u(v.front());
    for (std::size_t i = 1; i < v.size(); ++i) u.upper_bound_assign(v[i]);
    return u;
  }
};

template <typename D>
std::ostream& operator<<(std::ostream& os, const Powerset<D>& ps) {
  return os << ps.to_string();
}

}  // namespace polydom
