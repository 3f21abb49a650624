// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/core.hpp"

#include <cctype>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace polydom {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::abandoned: return "abandoned";
    case ErrorKind::out_of_memory: return "out_of_memory";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::topology_mismatch: return "topology_mismatch";
    case ErrorKind::parse_error: return "parse_error";
  }
  return "unknown";
}

void throw_overflow(const char* what) {
  throw DomainError(ErrorKind::overflow, what);
}

namespace {

constexpr std::int64_t kI64Min = std::numeric_limits<std::int64_t>::min();

std::int64_t checked_neg(std::int64_t a) {
  if (a == kI64Min) throw_overflow("checked64 negation overflow");
  return -a;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw_overflow("checked64 addition overflow");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r))
    throw_overflow("checked64 subtraction overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw_overflow("checked64 multiplication overflow");
  return r;
}

std::uint64_t mag(std::int64_t a) {
  return a < 0 ? 0u - static_cast<std::uint64_t>(a)
               : static_cast<std::uint64_t>(a);
}

// gcd of magnitudes in uint64 so that INT64_MIN is handled exactly.
std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    std::uint64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t u64_to_checked(std::uint64_t m, const char* what) {
  if (m > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    throw_overflow(what);
  return static_cast<std::int64_t>(m);
}

}  // namespace

Coefficient Coefficient::checked(std::int64_t v) {
  Coefficient c;
  c.mode_ = Mode::checked64;
  c.small_ = v;
  return c;
}

Coefficient Coefficient::from_string(const std::string& s, Mode mode) {
  if (s.empty()) throw DomainError(ErrorKind::parse_error, "empty integer");
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size())
    throw DomainError(ErrorKind::parse_error, "sign without digits");
  for (std::size_t k = i; k < s.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(s[k])))
      throw DomainError(ErrorKind::parse_error,
                        "invalid integer literal: " + s);
  mpz_class v(s[0] == '+' ? s.substr(1) : s, 10);
  return Coefficient(v).with_mode(mode);
}

Coefficient Coefficient::with_mode(Mode m) const {
  if (m == mode_) return *this;
  if (m == Mode::unbounded) {
    Coefficient r;
    r.big_ = mpz_class();
    // mpz from int64 via string-free path: split into high/low.
    r.big_ = static_cast<long>(small_ >> 32);
    r.big_ <<= 32;
    r.big_ += static_cast<unsigned long>(static_cast<std::uint64_t>(small_) &
                                         0xffffffffull);
    return r;
  }
  if (!fits_int64()) throw_overflow("value out of checked64 range");
  return checked(to_int64());
}

std::int64_t Coefficient::as_int64_checked() const {
  if (mode_ == Mode::checked64) return small_;
  if (!fits_int64()) throw_overflow("unbounded operand out of checked64 range");
  return to_int64();
}

int Coefficient::sign() const {
  if (mode_ == Mode::checked64) return small_ < 0 ? -1 : small_ > 0 ? 1 : 0;
  return sgn(big_);
}

bool Coefficient::is_one() const {
  if (mode_ == Mode::checked64) return small_ == 1;
  return big_ == 1;
}

Coefficient Coefficient::operator-() const {
  if (mode_ == Mode::checked64) return checked(checked_neg(small_));
  return Coefficient(mpz_class(-big_));
}

Coefficient Coefficient::abs() const { return sign() < 0 ? -*this : *this; }

Coefficient operator+(const Coefficient& a, const Coefficient& b) {
  if (Coefficient::join_modes(a, b) == Coefficient::Mode::checked64)
    return Coefficient::checked(
        checked_add(a.as_int64_checked(), b.as_int64_checked()));
  return Coefficient(mpz_class(a.big_ + b.big_));
}

Coefficient operator-(const Coefficient& a, const Coefficient& b) {
  if (Coefficient::join_modes(a, b) == Coefficient::Mode::checked64)
    return Coefficient::checked(
        checked_sub(a.as_int64_checked(), b.as_int64_checked()));
  return Coefficient(mpz_class(a.big_ - b.big_));
}

Coefficient operator*(const Coefficient& a, const Coefficient& b) {
  if (Coefficient::join_modes(a, b) == Coefficient::Mode::checked64)
    return Coefficient::checked(
        checked_mul(a.as_int64_checked(), b.as_int64_checked()));
  return Coefficient(mpz_class(a.big_ * b.big_));
}

Coefficient Coefficient::div_exact(const Coefficient& a, const Coefficient& b) {
  if (b.is_zero())
    throw DomainError(ErrorKind::invalid_argument, "division by zero");
  if (join_modes(a, b) == Mode::checked64) {
    std::int64_t x = a.as_int64_checked(), y = b.as_int64_checked();
    if (x == kI64Min && y == -1) throw_overflow("checked64 division overflow");
    return checked(x / y);
  }
  mpz_class q;
  mpz_divexact(q.get_mpz_t(), a.big_.get_mpz_t(), b.big_.get_mpz_t());
  return Coefficient(q);
}

Coefficient Coefficient::gcd(const Coefficient& a, const Coefficient& b) {
  if (join_modes(a, b) == Mode::checked64) {
    std::uint64_t g = gcd_u64(mag(a.as_int64_checked()),
                              mag(b.as_int64_checked()));
    return checked(u64_to_checked(g, "checked64 gcd overflow"));
  }
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), a.big_.get_mpz_t(), b.big_.get_mpz_t());
  return Coefficient(g);
}

Coefficient Coefficient::lcm(const Coefficient& a, const Coefficient& b) {
  if (a.is_zero() || b.is_zero()) return a.with_mode(join_modes(a, b)) * b;
  Coefficient g = gcd(a, b);
  return (div_exact(a.abs(), g) * b.abs());
}

Coefficient Coefficient::div_floor(const Coefficient& a, const Coefficient& b) {
  if (b.is_zero())
    throw DomainError(ErrorKind::invalid_argument, "division by zero");
  if (join_modes(a, b) == Mode::checked64) {
    std::int64_t x = a.as_int64_checked(), y = b.as_int64_checked();
    if (x == kI64Min && y == -1) throw_overflow("checked64 division overflow");
    std::int64_t q = x / y, r = x % y;
    if (r != 0 && ((r < 0) != (y < 0))) --q;
    return checked(q);
  }
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.big_.get_mpz_t(), b.big_.get_mpz_t());
  return Coefficient(q);
}

Coefficient Coefficient::div_ceil(const Coefficient& a, const Coefficient& b) {
  return -div_floor(-a, b);
}

int Coefficient::compare(const Coefficient& b) const {
  if (join_modes(*this, b) == Mode::checked64) {
    // Comparison never overflows: compare natively, converting the unbounded
    // side only if it is in range.
    if (mode_ == Mode::unbounded && !fits_int64()) return sign();
    if (b.mode_ == Mode::unbounded && !b.fits_int64()) return -b.sign();
    std::int64_t x = mode_ == Mode::checked64 ? small_ : to_int64();
    std::int64_t y = b.mode_ == Mode::checked64 ? b.small_ : b.to_int64();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  return cmp(big_, b.big_);
}

bool Coefficient::fits_int64() const {
  if (mode_ == Mode::checked64) return true;
  if (big_.fits_slong_p()) return true;
  // 32-bit long would under-report; compare against explicit 64-bit limits.
  static const mpz_class lo(std::to_string(kI64Min));
  static const mpz_class hi(
      std::to_string(std::numeric_limits<std::int64_t>::max()));
  return big_ >= lo && big_ <= hi;
}

std::int64_t Coefficient::to_int64() const {
  if (mode_ == Mode::checked64) return small_;
  if (big_.fits_slong_p() && sizeof(long) == 8) return big_.get_si();
  std::int64_t r = 0;
  mpz_class a = ::abs(big_);
  mpz_class hi = a >> 32, lo = a & mpz_class(0xffffffffl);
  r = (static_cast<std::int64_t>(hi.get_ui()) << 32) |
      static_cast<std::int64_t>(lo.get_ui());
  return sgn(big_) < 0 ? -r : r;
}

mpz_class Coefficient::to_mpz() const {
  if (mode_ == Mode::unbounded) return big_;
  return with_mode(Mode::unbounded).big_;
}

std::string Coefficient::to_string() const {
  if (mode_ == Mode::checked64) return std::to_string(small_);
  return big_.get_str();
}

std::ostream& operator<<(std::ostream& os, const Coefficient& c) {
  return os << c.to_string();
}

// ---------------------------------------------------------------------------

Rational::Rational(Coefficient num, Coefficient den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero())
    throw DomainError(ErrorKind::invalid_argument, "rational with zero denominator");
  canonicalize();
}

void Rational::canonicalize() {
  if (den_.sign() < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  if (num_.is_zero()) {
    den_ = Coefficient(1).with_mode(den_.mode());
    return;
  }
  Coefficient g = Coefficient::gcd(num_, den_);
  if (!g.is_one()) {
    num_ = Coefficient::div_exact(num_, g);
    den_ = Coefficient::div_exact(den_, g);
  }
}

Rational Rational::from_decimal(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw DomainError(ErrorKind::parse_error, "empty number");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Coefficient n = Coefficient::from_string(s.substr(0, slash));
    Coefficient d = Coefficient::from_string(s.substr(slash + 1));
    if (d.is_zero())
      throw DomainError(ErrorKind::parse_error, "zero denominator: " + text);
    return Rational(n, d);
  }
  // [sign] digits [. digits] [ (e|E) [sign] digits ]
  long exp10 = 0;
  std::string mantissa;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') mantissa.push_back(s[i++]);
  bool any_digit = false, seen_dot = false;
  long frac_digits = 0;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa.push_back(c);
      any_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if ((c == 'e' || c == 'E') && any_digit) {
      std::size_t pos = 0;
      try {
        exp10 = std::stol(s.substr(i + 1), &pos);
      } catch (const std::exception&) {
        throw DomainError(ErrorKind::parse_error, "bad exponent: " + text);
      }
      if (pos != s.size() - i - 1)
        throw DomainError(ErrorKind::parse_error, "bad exponent: " + text);
      break;
    } else {
      throw DomainError(ErrorKind::parse_error, "invalid number: " + text);
    }
  }
  if (!any_digit)
    throw DomainError(ErrorKind::parse_error, "invalid number: " + text);
  Coefficient n = Coefficient::from_string(mantissa);
  long net = exp10 - frac_digits;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(net)));
  if (net >= 0) return Rational(n * Coefficient(scale), Coefficient(1));
  return Rational(n, Coefficient(scale));
}

Rational Rational::operator-() const {
  Rational r = *this;
  r.num_ = -r.num_;
  return r;
}

Rational Rational::abs() const { return sign() < 0 ? -*this : *this; }

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}

Rational operator-(const Rational& a, const Rational& b) {
  return Rational(a.num() * b.den() - b.num() * a.den(), a.den() * b.den());
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num() * b.num(), a.den() * b.den());
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero())
    throw DomainError(ErrorKind::invalid_argument, "rational division by zero");
  return Rational(a.num() * b.den(), a.den() * b.num());
}

Coefficient Rational::floor() const {
  return Coefficient::div_floor(num_, den_);
}

Coefficient Rational::ceil() const { return Coefficient::div_ceil(num_, den_); }

int Rational::compare(const Rational& b) const {
  return (num_ * b.den_).compare(b.num_ * den_);
}

std::string Rational::to_string() const {
  if (den_.is_one()) return num_.to_string();
  return num_.to_string() + "/" + den_.to_string();
}

std::ostream& operator<<(std::ostream& os, const Rational& q) {
  return os << q.to_string();
}

// ---------------------------------------------------------------------------

const Rational& ExtendedBound::value() const {
  if (!finite_)
    throw DomainError(ErrorKind::invalid_argument, "value() of +infinity");
  return value_;
}

ExtendedBound operator+(const ExtendedBound& a, const ExtendedBound& b) {
  if (!a.is_finite() || !b.is_finite()) return ExtendedBound::plus_infinity();
  return ExtendedBound(a.value() + b.value());
}

int ExtendedBound::compare(const ExtendedBound& b) const {
  if (!finite_) return b.finite_ ? 1 : 0;
  if (!b.finite_) return -1;
  return value_.compare(b.value_);
}

std::string ExtendedBound::to_string() const {
  return finite_ ? value_.to_string() : "+infty";
}

// ---------------------------------------------------------------------------

namespace {
thread_local const BudgetContext* tls_budget = nullptr;
thread_local std::uint64_t tls_checkpoints = 0;
}  // namespace

BudgetContext BudgetContext::with_deadline(std::chrono::nanoseconds budget) {
  BudgetContext ctx;
  ctx.deadline_ = std::chrono::steady_clock::now() + budget;
  return ctx;
}

bool BudgetContext::expired() const {
  if (abandon_ && abandon_->load(std::memory_order_relaxed)) return true;
  return deadline_ && std::chrono::steady_clock::now() >= *deadline_;
}

BudgetScope::BudgetScope(const BudgetContext& ctx) : previous_(tls_budget) {
  tls_budget = &ctx;
}

BudgetScope::~BudgetScope() { tls_budget = previous_; }

void budget_checkpoint() {
  ++tls_checkpoints;
  const BudgetContext* ctx = tls_budget;
  if (!ctx) return;
  const auto& flag = ctx->abandon_flag();
  if (flag && flag->load(std::memory_order_relaxed))
    throw DomainError(ErrorKind::abandoned, "computation abandoned by flag");
  if (ctx->has_deadline() && (tls_checkpoints & 63) == 0 && ctx->expired())
    throw DomainError(ErrorKind::abandoned, "computation budget exhausted");
}

std::uint64_t budget_checkpoint_count() { return tls_checkpoints; }

}  // namespace polydom
