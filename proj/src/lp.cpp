#include "polydom/lp.hpp"

#include <algorithm>
#include <limits>
#include <new>
#include <ostream>
#include <utility>

namespace polydom {

namespace {

// The phase-1 artificial variable sorts after every real variable, so the
// least-index rule never favors it.
constexpr std::size_t kAuxVar = std::numeric_limits<std::size_t>::max();

[[noreturn]] void rethrow_oom() {
  throw DomainError(ErrorKind::out_of_memory,
                    "lp: allocation failed during pivoting");
}

// Adds q times the dictionary form of `var` into `acc`: the variable's row
// when it is basic, a unit column entry when it is nonbasic.
void accumulate_variable(const std::vector<std::vector<Rational>>& tab,
                         const std::vector<std::size_t>& basic,
                         const std::vector<std::size_t>& nonbasic,
                         std::vector<Rational>& acc, std::size_t var,
                         const Rational& q) {
  if (q.is_zero()) return;
  for (std::size_t i = 0; i < basic.size(); ++i) {
    if (basic[i] == var) {
      for (std::size_t s = 0; s < acc.size(); ++s) acc[s] += q * tab[i][s];
      return;
    }
  }
  for (std::size_t j = 0; j < nonbasic.size(); ++j) {
    if (nonbasic[j] == var) {
      acc[1 + j] += q;
      return;
    }
  }
}

}  // namespace

LpProblem::LpProblem(dim_t dim)
    : dim_(dim), cs_(dim), objective_(), mode_(OptimizationMode::maximize) {}

LpProblem::LpProblem(dim_t dim, const ConstraintSystem& cs,
                     LinearExpression objective, OptimizationMode mode)
    : dim_(dim), cs_(dim), objective_(std::move(objective)), mode_(mode) {
  if (objective_.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "lp: objective exceeds the problem dimension");
  for (const Constraint& c : cs) add_constraint(c);
}

void LpProblem::check_addable(const Constraint& c) const {
  if (c.kind() == RelKind::strict)
    throw DomainError(ErrorKind::topology_mismatch,
                      "lp: strict inequalities have no slack form; solve over "
                      "the topological closure instead");
  if (c.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "lp: constraint exceeds the problem dimension");
}

void LpProblem::append_internal_rows(const Constraint& c) {
  const LinearExpression& e = c.expression();
  InternalRow r;
  r.a.resize(dim_);
  for (dim_t d = 0; d < dim_; ++d)
    r.a[d] = Rational(e.coefficient(Variable(d)));
  r.b = Rational(e.inhomogeneous_term());
  if (c.kind() == RelKind::equal) {
    InternalRow neg;
    neg.a.resize(dim_);
    for (dim_t d = 0; d < dim_; ++d) neg.a[d] = -r.a[d];
    neg.b = -r.b;
    rows_.push_back(std::move(r));
    rows_.push_back(std::move(neg));
  } else {
    rows_.push_back(std::move(r));
  }
}

void LpProblem::add_constraint(const Constraint& c) {
  check_addable(c);
  cs_.insert(c);
  append_internal_rows(c);
  last_status_.reset();
}

void LpProblem::add_constraints(const ConstraintSystem& cs) {
  for (const Constraint& c : cs) add_constraint(c);
}

void LpProblem::set_objective_function(const LinearExpression& e) {
  if (e.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "lp: objective exceeds the problem dimension");
  objective_ = e;
  last_status_.reset();
}

void LpProblem::set_optimization_mode(OptimizationMode m) {
  mode_ = m;
  last_status_.reset();
}

void LpProblem::invalidate_tableau() const {
  tableau_valid_ = false;
  feas_ = Feasibility::unknown;
  installed_rows_ = 0;
  last_status_.reset();
  tab_.clear();
  basic_.clear();
  nonbasic_.clear();
}

void LpProblem::pivot(std::size_t row, std::size_t col,
                      std::vector<Rational>* extra) const {
  const std::size_t w = nonbasic_.size() + 1;
  const Rational inv = Rational(1) / tab_[row][1 + col];
  std::vector<Rational> nr(w);
  nr[1 + col] = inv;
  for (std::size_t s = 0; s < w; ++s) {
    if (s == 1 + col) continue;
    nr[s] = -tab_[row][s] * inv;
  }
  auto rewrite = [&](std::vector<Rational>& r) {
    const Rational d = r[1 + col];
    if (d.is_zero()) return;
    for (std::size_t s = 0; s < w; ++s) {
      if (s == 1 + col)
        r[s] = d * nr[s];
      else
        r[s] += d * nr[s];
    }
  };
  for (std::size_t i = 0; i < tab_.size(); ++i) {
    if (i == row) continue;
    budget_checkpoint();
    rewrite(tab_[i]);
  }
  if (extra != nullptr) rewrite(*extra);
  tab_[row] = std::move(nr);
  std::swap(basic_[row], nonbasic_[col]);
}

std::optional<std::size_t> LpProblem::bland_entering(
    const std::vector<Rational>& objective_row) const {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < nonbasic_.size(); ++j) {
    if (objective_row[1 + j].sign() > 0 &&
        (!best || nonbasic_[j] < nonbasic_[*best]))
      best = j;
  }
  return best;
}

std::optional<std::size_t> LpProblem::bland_leaving(std::size_t col) const {
  std::optional<std::size_t> best;
  Rational best_ratio;
  for (std::size_t i = 0; i < tab_.size(); ++i) {
    const Rational& coeff = tab_[i][1 + col];
    if (coeff.sign() >= 0) continue;
    Rational ratio = tab_[i][0] / -coeff;
    if (!best || ratio < best_ratio ||
        (ratio == best_ratio && basic_[i] < basic_[*best])) {
      best = i;
      best_ratio = std::move(ratio);
    }
  }
  return best;
}

std::vector<Rational> LpProblem::substitute_row(const InternalRow& r) const {
  std::vector<Rational> acc(1 + nonbasic_.size());
  acc[0] = r.b;
  for (dim_t d = 0; d < dim_; ++d) {
    const Rational& q = r.a[d];
    if (q.is_zero()) continue;
    accumulate_variable(tab_, basic_, nonbasic_, acc, 2 * d, q);
    accumulate_variable(tab_, basic_, nonbasic_, acc, 2 * d + 1, -q);
  }
  return acc;
}

std::vector<Rational> LpProblem::nonbasic_form(const LinearExpression& e,
                                               bool negate) const {
  std::vector<Rational> acc(1 + nonbasic_.size());
  acc[0] = Rational(e.inhomogeneous_term());
  if (negate) acc[0] = -acc[0];
  for (dim_t d = 0; d < dim_ && d < e.space_dimension(); ++d) {
    Rational q(e.coefficient(Variable(d)));
    if (q.is_zero()) continue;
    if (negate) q = -q;
    accumulate_variable(tab_, basic_, nonbasic_, acc, 2 * d, q);
    accumulate_variable(tab_, basic_, nonbasic_, acc, 2 * d + 1, -q);
  }
  return acc;
}

Rational LpProblem::variable_value(std::size_t var) const {
  for (std::size_t i = 0; i < basic_.size(); ++i)
    if (basic_[i] == var) return tab_[i][0];
  return Rational();
}

void LpProblem::rebuild_from_scratch() const {
  tab_.clear();
  basic_.clear();
  nonbasic_.clear();
  nonbasic_.reserve(2 * dim_);
  for (dim_t d = 0; d < dim_; ++d) {
    nonbasic_.push_back(2 * d);
    nonbasic_.push_back(2 * d + 1);
  }
  tab_.reserve(rows_.size());
  basic_.reserve(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    std::vector<Rational> row(1 + nonbasic_.size());
    row[0] = rows_[i].b;
    for (dim_t d = 0; d < dim_; ++d) {
      row[1 + 2 * d] = rows_[i].a[d];
      row[1 + 2 * d + 1] = -rows_[i].a[d];
    }
    tab_.push_back(std::move(row));
    basic_.push_back(2 * dim_ + i);
  }
  installed_rows_ = rows_.size();
  tableau_valid_ = true;
  run_phase1();
}

void LpProblem::run_phase1() const {
  bool feasible_start = true;
  for (const auto& row : tab_) {
    if (row[0].sign() < 0) {
      feasible_start = false;
      break;
    }
  }
  if (feasible_start) {
    feas_ = Feasibility::feasible;
    return;
  }

  // Artificial variable with coefficient +1 in every row; entering it at the
  // most-negative row makes every constant nonnegative at once.
  for (auto& row : tab_) row.push_back(Rational(1));
  nonbasic_.push_back(kAuxVar);
  const std::size_t aux_col = nonbasic_.size() - 1;
  std::vector<Rational> zaux(1 + nonbasic_.size());
  zaux[1 + aux_col] = Rational(-1);

  std::size_t r0 = 0;
  for (std::size_t i = 1; i < tab_.size(); ++i)
    if (tab_[i][0] < tab_[r0][0]) r0 = i;
  pivot(r0, aux_col, &zaux);
  ++phase1_pivots_;

  // Maximize the negated artificial variable; its optimum is zero exactly
  // when the original rows admit a common solution.
  for (;;) {
    budget_checkpoint();
    if (std::find(basic_.begin(), basic_.end(), kAuxVar) == basic_.end())
      break;  // the artificial variable sits at zero outside the basis
    auto c = bland_entering(zaux);
    if (!c) break;
    auto r = bland_leaving(*c);
    // A leaving row always exists: the objective is bounded above by zero.
    pivot(*r, *c, &zaux);
    ++phase1_pivots_;
  }

  if (zaux[0].sign() < 0) {
    feas_ = Feasibility::unfeasible;
    tableau_valid_ = false;
    return;
  }

  // Drive a zero-valued basic artificial variable out so its column can go.
  auto aux_row = std::find(basic_.begin(), basic_.end(), kAuxVar);
  if (aux_row != basic_.end()) {
    std::size_t r = static_cast<std::size_t>(aux_row - basic_.begin());
    std::optional<std::size_t> c;
    for (std::size_t j = 0; j < nonbasic_.size(); ++j) {
      if (!tab_[r][1 + j].is_zero() && (!c || nonbasic_[j] < nonbasic_[*c]))
        c = j;
    }
    if (c) {
      pivot(r, *c, &zaux);  // constant is zero, so feasibility is untouched
      ++phase1_pivots_;
    } else {
      tab_.erase(tab_.begin() + static_cast<std::ptrdiff_t>(r));
      basic_.erase(basic_.begin() + static_cast<std::ptrdiff_t>(r));
    }
  }

  auto aux_colv = std::find(nonbasic_.begin(), nonbasic_.end(), kAuxVar);
  if (aux_colv != nonbasic_.end()) {
    std::size_t j = static_cast<std::size_t>(aux_colv - nonbasic_.begin());
    for (auto& row : tab_)
      row.erase(row.begin() + static_cast<std::ptrdiff_t>(1 + j));
    nonbasic_.erase(aux_colv);
  }
  feas_ = Feasibility::feasible;
}

bool LpProblem::warm_install_rows() const {
  while (installed_rows_ < rows_.size()) {
    budget_checkpoint();
    const std::size_t slack = 2 * dim_ + installed_rows_;
    tab_.push_back(substitute_row(rows_[installed_rows_]));
    basic_.push_back(slack);
    ++installed_rows_;

    // Raise the new slack to a nonnegative value with simplex steps that
    // keep every older row feasible; its own row serves as the objective.
    for (;;) {
      budget_checkpoint();
      auto it = std::find(basic_.begin(), basic_.end(), slack);
      if (it == basic_.end()) break;  // left the basis, value exactly zero
      std::size_t srow = static_cast<std::size_t>(it - basic_.begin());
      if (tab_[srow][0].sign() >= 0) break;
      auto c = bland_entering(tab_[srow]);
      if (!c) {
        // No direction raises the slack: its maximum over the previously
        // feasible region is the current negative constant.
        feas_ = Feasibility::unfeasible;
        tableau_valid_ = false;
        return true;
      }
      const Rational tstar = -tab_[srow][0] / tab_[srow][1 + *c];
      std::optional<std::size_t> blocker;
      Rational tmin;
      for (std::size_t i = 0; i < tab_.size(); ++i) {
        if (i == srow) continue;
        const Rational& coeff = tab_[i][1 + *c];
        if (coeff.sign() >= 0) continue;
        Rational ratio = tab_[i][0] / -coeff;
        if (!blocker || ratio < tmin ||
            (ratio == tmin && basic_[i] < basic_[*blocker])) {
          blocker = i;
          tmin = std::move(ratio);
        }
      }
      if (!blocker || tstar <= tmin)
        pivot(srow, *c);  // the slack leaves the basis exactly at zero
      else
        pivot(*blocker, *c);
    }
  }
  feas_ = Feasibility::feasible;
  return true;
}

void LpProblem::ensure_feasible_basis() const {
  if (feas_ == Feasibility::unfeasible) return;
  if (tableau_valid_ && feas_ == Feasibility::feasible) {
    if (installed_rows_ == rows_.size()) return;
    if (warm_install_rows()) return;
  }
  rebuild_from_scratch();
}

LpStatus LpProblem::run_phase2() const {
  std::vector<Rational> z =
      nonbasic_form(objective_, mode_ == OptimizationMode::minimize);
  for (;;) {
    budget_checkpoint();
    auto c = bland_entering(z);
    if (!c) {
      last_value_ = mode_ == OptimizationMode::minimize ? -z[0] : z[0];
      last_point_.assign(dim_, Rational());
      for (dim_t d = 0; d < dim_; ++d)
        last_point_[d] = variable_value(2 * d) - variable_value(2 * d + 1);
      ray_.clear();
      return LpStatus::optimized;
    }
    auto r = bland_leaving(*c);
    if (!r) {
      // Unit increase of the entering variable moves each basic variable by
      // its column coefficient; project that direction onto user space.
      auto component = [&](std::size_t var) -> Rational {
        if (nonbasic_[*c] == var) return Rational(1);
        for (std::size_t i = 0; i < basic_.size(); ++i)
          if (basic_[i] == var) return tab_[i][1 + *c];
        return Rational();
      };
      ray_.assign(dim_, Rational());
      for (dim_t d = 0; d < dim_; ++d)
        ray_[d] = component(2 * d) - component(2 * d + 1);
      last_point_.clear();
      return LpStatus::unbounded;
    }
    pivot(*r, *c, &z);
  }
}

bool LpProblem::is_satisfiable() const {
  try {
    ensure_feasible_basis();
  } catch (const std::bad_alloc&) {
    invalidate_tableau();
    rethrow_oom();
  } catch (...) {
    invalidate_tableau();
    throw;
  }
  return feas_ == Feasibility::feasible;
}

LpStatus LpProblem::solve() const {
  try {
    ensure_feasible_basis();
    if (feas_ == Feasibility::unfeasible) {
      last_point_.clear();
      ray_.clear();
      last_status_ = LpStatus::unfeasible;
    } else {
      last_status_ = run_phase2();
    }
  } catch (const std::bad_alloc&) {
    invalidate_tableau();
    rethrow_oom();
  } catch (...) {
    invalidate_tableau();
    throw;
  }
  return *last_status_;
}

Generator LpProblem::optimizing_point() const {
  if (last_status_ != LpStatus::optimized)
    throw DomainError(ErrorKind::invalid_argument,
                      "lp: no optimizing point without an optimized solve");
  return Generator::point_from_rationals(last_point_);
}

Rational LpProblem::optimal_value() const {
  if (last_status_ != LpStatus::optimized)
    throw DomainError(ErrorKind::invalid_argument,
                      "lp: no optimal value without an optimized solve");
  return last_value_;
}

Generator LpProblem::unbounded_ray() const {
  if (last_status_ != LpStatus::unbounded)
    throw DomainError(ErrorKind::invalid_argument,
                      "lp: no recession certificate without an unbounded "
                      "solve");
  Coefficient scale(1);
  for (const Rational& q : ray_) scale = Coefficient::lcm(scale, q.den());
  LinearExpression e;
  for (dim_t d = 0; d < dim_; ++d) {
    Coefficient cd = ray_[d].num() * Coefficient::div_exact(scale, ray_[d].den());
    if (!cd.is_zero()) e += cd * LinearExpression(Variable(d));
  }
  e.extend_to(dim_);
  return Generator::ray(e);
}

void LpProblem::evaluate_objective_function(const Generator& g,
                                            Coefficient& num,
                                            Coefficient& den) const {
  if (g.space_dimension() > dim_)
    throw DomainError(ErrorKind::dimension_mismatch,
                      "lp: generator exceeds the problem dimension");
  if (g.kind() == GenKind::ray || g.kind() == GenKind::line)
    throw DomainError(ErrorKind::invalid_argument,
                      "lp: the objective has no value on a direction");
  Rational acc(objective_.inhomogeneous_term());
  for (dim_t d = 0; d < g.space_dimension() && d < objective_.space_dimension();
       ++d) {
    const Coefficient& q = objective_.coefficient(Variable(d));
    if (q.is_zero()) continue;
    acc += Rational(q) * g.coordinate(Variable(d));
  }
  num = acc.num();
  den = acc.den();
}

std::ostream& operator<<(std::ostream& os, LpStatus s) {
  switch (s) {
    case LpStatus::unfeasible: return os << "unfeasible";
    case LpStatus::unbounded: return os << "unbounded";
    case LpStatus::optimized: return os << "optimized";
  }
  return os;
}

}  // namespace polydom
