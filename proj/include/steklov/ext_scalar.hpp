#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>

#include "errors.hpp"

namespace steklov {

// Real number stored as sign * significand * 2^exponent with an unbounded
// exponent. Zero is canonical: sign 0, significand 0, exponent 0.
class ExtScalar {
 public:
  ExtScalar() = default;

  ExtScalar(double v) { assign(v, 0); }  // NOLINT: implicit by design

  static ExtScalar from_parts(double mantissa, std::int64_t exp2) {
    ExtScalar r;
    r.assign(mantissa, exp2);
    return r;
  }

  // sign * e^{log_mag}
  static ExtScalar from_log(int sign, double log_mag) {
    if (sign == 0) return {};
    if (!std::isfinite(log_mag)) {
      if (log_mag < 0) return {};
      throw RangeError("ExtScalar::from_log: infinite magnitude");
    }
    double l2 = log_mag / std::log(2.0);
    double ip = std::floor(l2);
    double frac = l2 - ip;
    return from_parts(sign * std::exp2(frac), static_cast<std::int64_t>(ip));
  }

  int sign() const { return sign_; }
  double significand() const { return sig_; }
  std::int64_t exponent() const { return exp_; }
  bool is_zero() const { return sign_ == 0; }

  // ln|x|; -inf for zero.
  double log_abs() const {
    if (sign_ == 0) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(exp_) * std::log(2.0) + std::log(sig_);
  }

  double log2_abs() const {
    if (sign_ == 0) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(exp_) + std::log2(sig_);
  }

  bool fits_double() const {
    return sign_ == 0 || (exp_ >= -1074 && exp_ <= 1023);
  }

  // Throws RangeError when the value is outside the native range.
  double to_double() const {
    if (!fits_double())
      throw RangeError("ExtScalar exponent " + std::to_string(exp_) +
                       " outside native range");
    return std::ldexp(sign_ * sig_, static_cast<int>(exp_));
  }

  // Underflows quietly to zero; still throws on overflow.
  double to_double_flush() const {
    if (sign_ != 0 && exp_ < -1074) return 0.0;
    return to_double();
  }

  ExtScalar operator-() const {
    ExtScalar r = *this;
    r.sign_ = -r.sign_;
    return r;
  }

  ExtScalar abs() const {
    ExtScalar r = *this;
    if (r.sign_ < 0) r.sign_ = 1;
    return r;
  }

  friend ExtScalar operator*(const ExtScalar& a, const ExtScalar& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return {};
    return from_parts(a.sign_ * b.sign_ * a.sig_ * b.sig_, a.exp_ + b.exp_);
  }

  friend ExtScalar operator/(const ExtScalar& a, const ExtScalar& b) {
    if (b.sign_ == 0) throw RangeError("ExtScalar division by zero");
    if (a.sign_ == 0) return {};
    return from_parts(a.sign_ * b.sign_ * a.sig_ / b.sig_, a.exp_ - b.exp_);
  }

  friend ExtScalar operator+(const ExtScalar& a, const ExtScalar& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    const ExtScalar& hi = a.exp_ >= b.exp_ ? a : b;
    const ExtScalar& lo = a.exp_ >= b.exp_ ? b : a;
    std::int64_t shift = hi.exp_ - lo.exp_;
    if (shift > 60) return hi;
    double m = hi.sign_ * hi.sig_ +
               lo.sign_ * std::ldexp(lo.sig_, -static_cast<int>(shift));
    return from_parts(m, hi.exp_);
  }

  friend ExtScalar operator-(const ExtScalar& a, const ExtScalar& b) {
    return a + (-b);
  }

  ExtScalar& operator+=(const ExtScalar& o) { return *this = *this + o; }
  ExtScalar& operator-=(const ExtScalar& o) { return *this = *this - o; }
  ExtScalar& operator*=(const ExtScalar& o) { return *this = *this * o; }
  ExtScalar& operator/=(const ExtScalar& o) { return *this = *this / o; }

  friend int compare(const ExtScalar& a, const ExtScalar& b) {
    ExtScalar d = a - b;
    return d.sign_;
  }
  friend bool operator<(const ExtScalar& a, const ExtScalar& b) {
    return compare(a, b) < 0;
  }
  friend bool operator>(const ExtScalar& a, const ExtScalar& b) {
    return compare(a, b) > 0;
  }
  friend bool operator<=(const ExtScalar& a, const ExtScalar& b) {
    return compare(a, b) <= 0;
  }
  friend bool operator>=(const ExtScalar& a, const ExtScalar& b) {
    return compare(a, b) >= 0;
  }
  friend bool operator==(const ExtScalar& a, const ExtScalar& b) {
    return a.sign_ == b.sign_ && a.sig_ == b.sig_ && a.exp_ == b.exp_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtScalar& x) {
    if (x.sign_ == 0) return os << "0";
    double l10 = x.log2_abs() * std::log10(2.0);
    double ip = std::floor(l10);
    double m = std::pow(10.0, l10 - ip);
    if (x.sign_ < 0) os << '-';
    return os << m << "e" << static_cast<long long>(ip);
  }

 private:
  void assign(double m, std::int64_t e) {
    if (!std::isfinite(m)) throw RangeError("ExtScalar from non-finite value");
    if (m == 0.0) {
      sign_ = 0;
      sig_ = 0.0;
      exp_ = 0;
      return;
    }
    int k = 0;
    double f = std::frexp(std::fabs(m), &k);  // f in [0.5, 1)
    sign_ = m > 0 ? 1 : -1;
    sig_ = 2.0 * f;
    exp_ = e + k - 1;
  }

  int sign_ = 0;
  double sig_ = 0.0;
  std::int64_t exp_ = 0;
};

inline ExtScalar sqrt(const ExtScalar& x) {
  if (x.sign() < 0) throw RangeError("ExtScalar sqrt of negative value");
  if (x.is_zero()) return {};
  std::int64_t e = x.exponent();
  double m = x.significand();
  if (e % 2 != 0) {
    m *= 2.0;
    e -= 1;
  }
  return ExtScalar::from_parts(std::sqrt(m), e / 2);
}

// sqrt(a^2 + b^2) without squaring overflow.
inline ExtScalar hypot(const ExtScalar& a, const ExtScalar& b) {
  ExtScalar x = a.abs(), y = b.abs();
  if (x < y) std::swap(x, y);
  if (x.is_zero()) return {};
  ExtScalar r = y / x;
  return x * sqrt(ExtScalar(1.0) + r * r);
}

inline ExtScalar pow2(const ExtScalar& x) { return x * x; }

}  // namespace steklov
