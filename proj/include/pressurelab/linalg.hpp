#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

namespace pressurelab {

/// A point of the ambient space. Interval and circle maps only use `x`.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Row-major 2x2 matrix [[a, b], [c, d]].
///
/// One-dimensional derivatives are stored as s * I so that products, norms
/// and conorms need no special casing: both singular values of s * I are |s|.
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static constexpr Mat2 identity() { return {}; }
  static constexpr Mat2 scalar(double s) { return {s, 0.0, 0.0, s}; }
  static Mat2 rotation(double theta) {
    return {std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)};
  }

  double det() const { return a * d - b * c; }
  double max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  }

  friend Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
  friend Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
  friend Point operator*(const Mat2& m, const Point& p) {
    return {m.a * p.x + m.b * p.y, m.c * p.x + m.d * p.y};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Singular values (largest, smallest) of a 2x2 matrix, via the closed form
/// s_max,min = (sqrt((a+d)^2 + (c-b)^2) +- sqrt((a-d)^2 + (b+c)^2)) / 2.
/// Exact for scalar multiples of rotations, where the second root vanishes.
inline std::pair<double, double> singular_values(const Mat2& m) {
  const double p = std::hypot(m.a + m.d, m.c - m.b);
  const double q = std::hypot(m.a - m.d, m.b + m.c);
  return {0.5 * (p + q), 0.5 * std::abs(p - q)};
}

/// Matrix product kept as (normalized matrix, log scale) so that long
/// cocycle products neither overflow nor underflow. log |det| is summed
/// separately: the small singular value of the normalized matrix underflows
/// on long non-conformal products, so m(P) is taken as |det P| / ||P||.
class ScaledProduct {
 public:
  static constexpr int kRenormalizeEvery = 8;

  const Mat2& matrix() const { return m_; }
  double log_scale() const { return log_scale_; }

  /// this <- this * rhs
  void right_multiply(const Mat2& rhs) {
    m_ = m_ * rhs;
    log_abs_det_ += std::log(std::abs(rhs.det()));
    if (++steps_ % kRenormalizeEvery == 0) renormalize();
  }
  /// this <- lhs * this
  void left_multiply(const Mat2& lhs) {
    m_ = lhs * m_;
    log_abs_det_ += std::log(std::abs(lhs.det()));
    if (++steps_ % kRenormalizeEvery == 0) renormalize();
  }

  void renormalize() {
    const double s = m_.max_abs();
    if (s > 0.0 && std::isfinite(s)) {
      m_ = (1.0 / s) * m_;
      log_scale_ += std::log(s);
    }
  }

  /// (log ||P||, log m(P)) of the represented product P.
  std::pair<double, double> log_singular_values() const {
    const double log_hi = log_scale_ + std::log(singular_values(m_).first);
    return {log_hi, std::min(log_abs_det_ - log_hi, log_hi)};
  }

 private:
  Mat2 m_{};
  double log_scale_ = 0.0;
  double log_abs_det_ = 0.0;
  int steps_ = 0;
};

/// Thin QR factorization M = Q R of a 2x2 matrix by Gram-Schmidt on columns.
/// Returns Q and the diagonal of R (with signs). Used for Lyapunov spectra.
struct QrStep {
  Mat2 q;
  double r11 = 0.0;
  double r22 = 0.0;
};

inline QrStep qr_decompose(const Mat2& m) {
  const double n1 = std::hypot(m.a, m.c);
  const double q1x = m.a / n1, q1y = m.c / n1;
  const double r12 = q1x * m.b + q1y * m.d;
  const double ux = m.b - r12 * q1x, uy = m.d - r12 * q1y;
  // The second column of Q is fixed to the rotation-completion of the first,
  // so det Q = 1 and r22 carries the orientation sign.
  const double q2x = -q1y, q2y = q1x;
  const double r22 = q2x * ux + q2y * uy;
  return {{q1x, q2x, q1y, q2y}, n1, r22};
}

}  // namespace pressurelab
