#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace hill {

/// Real 2x2 matrix, row-major.
struct Mat2 {
  double m11 = 0.0, m12 = 0.0, m21 = 0.0, m22 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  constexpr double trace() const { return m11 + m22; }
  constexpr double det() const { return m11 * m22 - m12 * m21; }

  /// Inverse via the adjugate; caller guarantees det != 0.
  Mat2 inverse() const {
    const double d = det();
    return {m22 / d, -m12 / d, -m21 / d, m11 / d};
  }

  bool is_finite() const {
    return std::isfinite(m11) && std::isfinite(m12) && std::isfinite(m21) && std::isfinite(m22);
  }

  double max_abs() const {
    return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
  }

  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
  friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
  }
  friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& a) {
    return {s * a.m11, s * a.m12, s * a.m21, s * a.m22};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// Largest eigenvalue modulus of a real 2x2 matrix.
inline double spectral_radius(const Mat2& m) {
  const double t = m.trace();
  const double d = m.det();
  const double disc = t * t - 4.0 * d;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return std::max(std::abs(0.5 * (t + s)), std::abs(0.5 * (t - s)));
  }
  // complex pair: |lambda|^2 = det
  return std::sqrt(std::abs(d));
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) { return (a - b).max_abs(); }

}  // namespace hill
