#ifndef DEVLAB_EXTENDED_REAL_HPP
#define DEVLAB_EXTENDED_REAL_HPP

#include <cmath>
#include <limits>
#include <ostream>

#include "devlab/errors.hpp"

namespace devlab {

/// A value of [-inf, +inf] with the infinite cases carried as an explicit
/// tag. Arithmetic on the payload only happens for finite values, so
/// infinities never leak into floating-point expressions.
class ExtReal {
public:
  enum class Kind { neg_inf, finite, pos_inf };

  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : kind_(Kind::finite), value_(v) {}  // NOLINT

  static constexpr ExtReal pos_inf() { return ExtReal(Kind::pos_inf); }
  static constexpr ExtReal neg_inf() { return ExtReal(Kind::neg_inf); }

  /// Maps IEEE infinities to the tagged form. NaN is rejected.
  static ExtReal from_double(double v) {
    if (std::isnan(v)) throw ArgumentError("ExtReal: NaN is not an extended real");
    if (v == std::numeric_limits<double>::infinity()) return pos_inf();
    if (v == -std::numeric_limits<double>::infinity()) return neg_inf();
    return ExtReal(v);
  }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::finite; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::pos_inf; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::neg_inf; }

  /// Finite payload; throws for the infinite cases.
  double value() const {
    if (!is_finite()) throw DomainError("ExtReal: value() on an infinite quantity");
    return value_;
  }

  /// IEEE rendering, for output and plotting only.
  double to_double() const {
    switch (kind_) {
      case Kind::pos_inf: return std::numeric_limits<double>::infinity();
      case Kind::neg_inf: return -std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  ExtReal operator-() const {
    switch (kind_) {
      case Kind::pos_inf: return neg_inf();
      case Kind::neg_inf: return pos_inf();
      default: return ExtReal(-value_);
    }
  }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.kind_ != b.kind_) return false;
    return !a.is_finite() || a.value_ == b.value_;
  }
  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
    return a.is_finite() && a.value_ < b.value_;
  }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return !(b < a); }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return !(a < b); }

  /// Sum with +inf absorbing; (+inf) + (-inf) is rejected.
  friend ExtReal operator+(const ExtReal& a, const ExtReal& b) {
    if (a.is_finite() && b.is_finite()) return ExtReal(a.value_ + b.value_);
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
      throw DomainError("ExtReal: inf - inf is undefined");
    return a.is_finite() ? b : a;
  }
  friend ExtReal operator-(const ExtReal& a, const ExtReal& b) { return a + (-b); }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
    if (x.is_pos_inf()) return os << "+inf";
    if (x.is_neg_inf()) return os << "-inf";
    return os << x.value_;
  }

private:
  constexpr explicit ExtReal(Kind k) : kind_(k) {}

  Kind kind_ = Kind::finite;
  double value_ = 0.0;
};

}  // namespace devlab

#endif  // DEVLAB_EXTENDED_REAL_HPP
