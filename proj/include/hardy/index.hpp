#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace hardy {

/// An exponent in the extended half-line [1, inf].
///
/// Infinity is a first-class value: reciprocal() of an infinite index is
/// exactly 0 and the Hölder conjugate maps 1 <-> inf without rounding.
class Index {
 public:
  constexpr Index() = default;
  constexpr Index(double v) : value_(v) {}  // NOLINT: implicit from literals

  static constexpr Index infinity() {
    return Index(std::numeric_limits<double>::infinity());
  }

  constexpr bool is_infinite() const { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_one() const { return value_ == 1.0; }
  constexpr double value() const { return value_; }

  /// 1/value, exact 0 for infinity.
  constexpr double reciprocal() const { return is_infinite() ? 0.0 : 1.0 / value_; }

  /// Hölder conjugate r' with 1/r + 1/r' = 1.
  constexpr Index conjugate() const {
    if (is_infinite()) return Index(1.0);
    if (value_ == 1.0) return infinity();
    return Index(value_ / (value_ - 1.0));
  }

  constexpr bool in_range() const { return value_ >= 1.0 && !std::isnan(value_); }

  friend constexpr bool operator==(Index a, Index b) { return a.value_ == b.value_; }
  friend constexpr bool operator<(Index a, Index b) { return a.value_ < b.value_; }
  friend constexpr bool operator<=(Index a, Index b) { return a.value_ <= b.value_; }

  std::string str() const {
    if (is_infinite()) return "inf";
    std::ostringstream out;
    out << value_;
    return out.str();
  }

 private:
  double value_ = 1.0;
};

/// Parses "inf", "infinity" or a number.
Index parse_index(const std::string& text);

}  // namespace hardy
