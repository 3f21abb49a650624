// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Scalar layer: exact integers (unbounded or checked 64-bit), exact rationals,
// bounds extended with +infinity, failure taxonomy, and computation budgets.

#pragma once

#include <gmpxx.h>

#include <atomic>
#include <chrono>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace polydom {

enum class ErrorKind {
  overflow,
  abandoned,
  out_of_memory,
  dimension_mismatch,
  invalid_argument,
  topology_mismatch,
  parse_error,
};

const char* to_string(ErrorKind k);

// The single failure type. Public operations either succeed or throw exactly
// one of these; on throw, every input object is unchanged and valid.
class DomainError : public std::runtime_error {
 public:
  DomainError(ErrorKind kind, std::string message, std::size_t line = 0,
              std::size_t column = 0)
      : std::runtime_error(std::move(message)),
        kind_(kind),
        line_(line),
        column_(column) {}

  ErrorKind kind() const { return kind_; }
  // Populated for parse_error only; 1-based, 0 = not applicable.
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
};

[[noreturn]] void throw_overflow(const char* what);

// Exact integer. Unbounded (GMP) by default; checked64 mode computes in
// native int64 and signals ErrorKind::overflow instead of wrapping. Mode is
// carried per value and is sticky across operations: combining a checked64
// value with an unbounded one yields checked64 (the unbounded operand must be
// in range, otherwise the operation overflows).
class Coefficient {
 public:
  enum class Mode : std::uint8_t { unbounded, checked64 };

  Coefficient() : mode_(Mode::unbounded), small_(0) {}
  Coefficient(long v) : mode_(Mode::unbounded), small_(0), big_(v) {}
  Coefficient(int v) : Coefficient(static_cast<long>(v)) {}
  explicit Coefficient(const mpz_class& v)
      : mode_(Mode::unbounded), small_(0), big_(v) {}

  static Coefficient checked(std::int64_t v);
  // Parses an optionally signed decimal integer.
  static Coefficient from_string(const std::string& s,
                                 Mode mode = Mode::unbounded);

  Mode mode() const { return mode_; }
  bool is_checked() const { return mode_ == Mode::checked64; }
  // Returns the same number carried in the other mode; switching to checked64
  // overflows if the value does not fit.
  Coefficient with_mode(Mode m) const;

  int sign() const;
  bool is_zero() const { return sign() == 0; }
  bool is_one() const;

  Coefficient operator-() const;
  Coefficient abs() const;
  friend Coefficient operator+(const Coefficient& a, const Coefficient& b);
  friend Coefficient operator-(const Coefficient& a, const Coefficient& b);
  friend Coefficient operator*(const Coefficient& a, const Coefficient& b);
  Coefficient& operator+=(const Coefficient& b) { return *this = *this + b; }
  Coefficient& operator-=(const Coefficient& b) { return *this = *this - b; }
  Coefficient& operator*=(const Coefficient& b) { return *this = *this * b; }

  // Quotient of an exact division (pre: b != 0 and b divides a).
  static Coefficient div_exact(const Coefficient& a, const Coefficient& b);
  // gcd(|a|, |b|); gcd(0, 0) = 0.
  static Coefficient gcd(const Coefficient& a, const Coefficient& b);
  static Coefficient lcm(const Coefficient& a, const Coefficient& b);
  // Floor/ceil quotients, exact for any nonzero divisor.
  static Coefficient div_floor(const Coefficient& a, const Coefficient& b);
  static Coefficient div_ceil(const Coefficient& a, const Coefficient& b);

  int compare(const Coefficient& b) const;
  friend bool operator==(const Coefficient& a, const Coefficient& b) {
    return a.compare(b) == 0;
  }
  friend std::strong_ordering operator<=>(const Coefficient& a,
                                          const Coefficient& b) {
    int c = a.compare(b);
    return c < 0 ? std::strong_ordering::less
         : c > 0 ? std::strong_ordering::greater
                 : std::strong_ordering::equal;
  }

  bool fits_int64() const;
  std::int64_t to_int64() const;  // pre: fits_int64()
  mpz_class to_mpz() const;
  std::string to_string() const;

 private:
  Mode mode_;
  std::int64_t small_;  // value when checked64
  mpz_class big_;       // value when unbounded

  static Mode join_modes(const Coefficient& a, const Coefficient& b) {
    return (a.mode_ == Mode::checked64 || b.mode_ == Mode::checked64)
               ? Mode::checked64
               : Mode::unbounded;
  }
  std::int64_t as_int64_checked() const;
};

std::ostream& operator<<(std::ostream& os, const Coefficient& c);

// Exact rational, always canonical: den > 0 and gcd(|num|, den) = 1.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long n) : num_(n), den_(1) {}
  Rational(int n) : Rational(static_cast<long>(n)) {}
  explicit Rational(Coefficient n) : num_(std::move(n)), den_(1) {}
  Rational(Coefficient num, Coefficient den);  // pre: den != 0
  Rational(long num, long den) : Rational(Coefficient(num), Coefficient(den)) {}

  // Exact value of a decimal literal such as "2.5", "-1.25e2", "3/4", "7".
  static Rational from_decimal(const std::string& text);

  const Coefficient& num() const { return num_; }
  const Coefficient& den() const { return den_; }
  int sign() const { return num_.sign(); }
  bool is_zero() const { return num_.is_zero(); }
  bool is_integer() const { return den_.is_one(); }

  Rational operator-() const;
  Rational abs() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);  // pre: b != 0
  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  Coefficient floor() const;
  Coefficient ceil() const;

  int compare(const Rational& b) const;
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.compare(b) == 0;
  }
  friend std::strong_ordering operator<=>(const Rational& a,
                                          const Rational& b) {
    int c = a.compare(b);
    return c < 0 ? std::strong_ordering::less
         : c > 0 ? std::strong_ordering::greater
                 : std::strong_ordering::equal;
  }

  // "p/q", or just "p" when q = 1.
  std::string to_string() const;

 private:
  Coefficient num_;
  Coefficient den_;
  void canonicalize();
};

std::ostream& operator<<(std::ostream& os, const Rational& q);

// A rational bound extended with +infinity. Addition saturates at +infinity.
class ExtendedBound {
 public:
  ExtendedBound() : finite_(false) {}  // +infinity
  explicit ExtendedBound(Rational v) : finite_(true), value_(std::move(v)) {}
  static ExtendedBound plus_infinity() { return ExtendedBound(); }

  bool is_finite() const { return finite_; }
  const Rational& value() const;  // pre: is_finite()

  friend ExtendedBound operator+(const ExtendedBound& a,
                                 const ExtendedBound& b);
  int compare(const ExtendedBound& b) const;  // +infinity compares greatest
  friend bool operator==(const ExtendedBound& a, const ExtendedBound& b) {
    return a.compare(b) == 0;
  }
  friend bool operator<(const ExtendedBound& a, const ExtendedBound& b) {
    return a.compare(b) < 0;
  }
  friend bool operator<=(const ExtendedBound& a, const ExtendedBound& b) {
    return a.compare(b) <= 0;
  }

  std::string to_string() const;  // "p/q" or "+infty"

 private:
  bool finite_;
  Rational value_;
};

// Deadline plus an externally settable abandon flag. A context is installed
// per-thread (never globally) with BudgetScope; long-running operations poll
// budget_checkpoint() on every pivot / row combination and unwind with
// ErrorKind::abandoned once the budget is exhausted.
class BudgetContext {
 public:
  BudgetContext() = default;
  static BudgetContext with_deadline(std::chrono::nanoseconds budget);

  void set_abandon_flag(std::shared_ptr<std::atomic<bool>> flag) {
    abandon_ = std::move(flag);
  }
  const std::shared_ptr<std::atomic<bool>>& abandon_flag() const {
    return abandon_;
  }
  bool has_deadline() const { return deadline_.has_value(); }
  // True once the deadline passed or the abandon flag was raised.
  bool expired() const;

 private:
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::shared_ptr<std::atomic<bool>> abandon_;
};

class BudgetScope {
 public:
  explicit BudgetScope(const BudgetContext& ctx);
  ~BudgetScope();
  BudgetScope(const BudgetScope&) = delete;
  BudgetScope& operator=(const BudgetScope&) = delete;

 private:
  const BudgetContext* previous_;
};

// Amortized O(1): the abandon flag is read every call, the clock only every
// 64th call. Throws DomainError(abandoned) when the installed budget expired.
void budget_checkpoint();

// Number of checkpoints taken by this thread (test instrumentation).
std::uint64_t budget_checkpoint_count();

}  // namespace polydom
