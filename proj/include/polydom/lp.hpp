// Exact-arithmetic linear programming over the rationals.
//
// LpProblem is a dictionary-based simplex solver: every pivot is performed
// with Rational coefficients, so feasibility verdicts and optima are exact.
// Unrestricted user variables are split into differences of nonnegative
// ones, equalities become opposing inequality pairs, and each inequality
// contributes one slack, so the working dictionary is the textbook one.
//
// Feasibility is established once by an auxiliary-variable phase 1 and then
// cached together with the basis.  Changing the objective or the sense of
// optimization keeps the cached basis (phase 1 is not repeated); adding a
// constraint re-checks feasibility starting from the cached basis instead
// of from scratch.  Pivot selection follows Bland's least-index rule
// throughout, which rules out cycling even on degenerate dictionaries.
#ifndef POLYDOM_LP_HPP
#define POLYDOM_LP_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "polydom/core.hpp"
#include "polydom/linear_forms.hpp"

namespace polydom {

enum class OptimizationMode { maximize, minimize };
enum class LpStatus { unfeasible, unbounded, optimized };

class LpProblem {
 public:
  explicit LpProblem(dim_t dim = 0);
  LpProblem(dim_t dim, const ConstraintSystem& cs, LinearExpression objective,
            OptimizationMode mode);

  dim_t space_dimension() const { return dim_; }
  const ConstraintSystem& constraints() const { return cs_; }
  const LinearExpression& objective_function() const { return objective_; }
  OptimizationMode optimization_mode() const { return mode_; }

  // Appends a non-strict constraint.  The next satisfiability query resumes
  // from the cached basis when one is available.  Throws topology_mismatch
  // for strict inequalities and dimension_mismatch past space_dimension().
  void add_constraint(const Constraint& c);
  void add_constraints(const ConstraintSystem& cs);

  // Both keep the cached feasibility state and basis; only the optimization
  // phase is redone on the next solve().
  void set_objective_function(const LinearExpression& e);
  void set_optimization_mode(OptimizationMode m);

  bool is_satisfiable() const;
  LpStatus solve() const;

  // Pre: the last solve() returned optimized (invalid_argument otherwise).
  Generator optimizing_point() const;
  Rational optimal_value() const;

  // Certificate for an unbounded verdict: a recession direction of the
  // feasible region along which the objective strictly improves.
  // Pre: the last solve() returned unbounded (invalid_argument otherwise).
  Generator unbounded_ray() const;

  // Exact value of the objective at a point or closure point, as num/den
  // with den > 0.  Rays and lines have no objective value.
  void evaluate_objective_function(const Generator& g, Coefficient& num,
                                   Coefficient& den) const;

  // Total pivots spent in phase-1 runs so far; stays put across objective
  // changes and basis-reusing constraint additions, which is the observable
  // face of the incremental contract.
  std::size_t phase1_pivot_count() const { return phase1_pivots_; }

 private:
  // Dictionary: basic_[i] = tab_[i][0] + sum_j tab_[i][1 + j] * nonbasic_[j].
  // Variable ids: 2*d and 2*d + 1 are the nonnegative halves of user
  // dimension d (their difference is the user value); ids >= 2*dim_ are
  // slacks in row-insertion order.  kAuxVar is the phase-1 artificial
  // variable and sorts after everything else in the least-index order.
  struct InternalRow {
    std::vector<Rational> a;  // over user dimensions
    Rational b;               // row is  b + a.x >= 0
  };

  enum class Feasibility { unknown, feasible, unfeasible };

  void check_addable(const Constraint& c) const;
  void append_internal_rows(const Constraint& c);

  void ensure_feasible_basis() const;  // phase 1 or warm continuation
  void rebuild_from_scratch() const;
  bool warm_install_rows() const;      // false: basis unusable, caller redoes
  void run_phase1() const;
  LpStatus run_phase2() const;

  // Dictionary mechanics.  `extra` is an expression over the nonbasic
  // variables (an objective row) rewritten alongside the dictionary.
  void pivot(std::size_t row, std::size_t col,
             std::vector<Rational>* extra = nullptr) const;
  std::optional<std::size_t> bland_entering(
      const std::vector<Rational>& objective_row) const;
  std::optional<std::size_t> bland_leaving(std::size_t col) const;
  std::vector<Rational> substitute_row(const InternalRow& r) const;
  std::vector<Rational> nonbasic_form(const LinearExpression& e,
                                      bool negate) const;
  Rational variable_value(std::size_t var) const;
  void invalidate_tableau() const;

  dim_t dim_;
  ConstraintSystem cs_;
  LinearExpression objective_;
  OptimizationMode mode_;

  // Internal inequality rows (equalities already split); rows past
  // installed_rows_ have not been folded into the dictionary yet.
  mutable std::vector<InternalRow> rows_;
  mutable std::size_t installed_rows_ = 0;

  mutable std::vector<std::vector<Rational>> tab_;
  mutable std::vector<std::size_t> basic_;     // var id per dictionary row
  mutable std::vector<std::size_t> nonbasic_;  // var id per dictionary column
  mutable bool tableau_valid_ = false;
  mutable Feasibility feas_ = Feasibility::unknown;

  mutable std::optional<LpStatus> last_status_;
  mutable std::vector<Rational> last_point_;  // user coords when optimized
  mutable Rational last_value_;
  mutable std::vector<Rational> ray_;  // user coords when unbounded

  mutable std::size_t phase1_pivots_ = 0;
};

std::ostream& operator<<(std::ostream& os, LpStatus s);

}  // namespace polydom

#endif  // POLYDOM_LP_HPP
