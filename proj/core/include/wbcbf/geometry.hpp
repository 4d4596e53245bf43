#pragma once

#include <algorithm>
#include <cmath>

namespace wbcbf {

/// Planar position / displacement in the East-North frame, meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(const Vec2& v, double s) { return s * v; }
inline Vec2 operator-(const Vec2& v) { return {-v.x, -v.y}; }

/// General 2x2 matrix, row major. Used for Jacobians and intermediate
/// products that are not symmetric.
struct Mat2 {
  double m00 = 0.0, m01 = 0.0;
  double m10 = 0.0, m11 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Mat2 transposed() const { return {m00, m10, m01, m11}; }
  double trace() const { return m00 + m11; }

  Vec2 operator*(const Vec2& v) const {
    return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
  }
  Mat2 operator*(const Mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
};

/// Symmetric positive semidefinite 2x2 matrix [[a, b], [b, d]], m^2 units.
/// Symmetry holds by construction; the PSD invariant is checked against
/// kPsdTol on the determinant.
struct SpdMat2 {
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;

  /// Tolerance on the determinant test, m^4. Sensor variances are >= 1e-2 m^2,
  /// so round-off lives far below this while garbage does not.
  static constexpr double kPsdTol = 1e-10;

  static SpdMat2 isotropic(double var) { return {var, 0.0, var}; }
  static SpdMat2 zero() { return {}; }
  static SpdMat2 identity() { return {1.0, 0.0, 1.0}; }

  double det() const { return a * d - b * b; }
  double trace() const { return a + d; }
  bool is_psd(double tol = kPsdTol) const {
    return a >= -tol && d >= -tol && det() >= -tol;
  }

  Mat2 as_mat2() const { return {a, b, b, d}; }
  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, b * v.x + d * v.y}; }
};

inline SpdMat2 operator+(const SpdMat2& p, const SpdMat2& q) {
  return {p.a + q.a, p.b + q.b, p.d + q.d};
}
inline SpdMat2 operator-(const SpdMat2& p, const SpdMat2& q) {
  return {p.a - q.a, p.b - q.b, p.d - q.d};
}
inline SpdMat2 operator*(double s, const SpdMat2& m) { return {s * m.a, s * m.b, s * m.d}; }

/// Average the off-diagonal entries of a nearly-symmetric product.
inline SpdMat2 symmetrize(const Mat2& m) {
  return {m.m00, 0.5 * (m.m01 + m.m10), m.m11};
}

/// A 2D Gaussian distribution: the universal currency of sensing and fusion.
struct Gaussian2 {
  Vec2 mean;
  SpdMat2 cov;
};

/// Eigendecomposition of a symmetric 2x2 matrix: l1 >= l2, orthonormal
/// eigenvectors v1, v2.
struct SymEig2 {
  double l1 = 0.0;
  double l2 = 0.0;
  Vec2 v1;
  Vec2 v2;
};

SymEig2 sym_eig(const SpdMat2& m);

/// Symmetric PSD square root: returns S with S*S = m. Eigenvalues are clamped
/// to [0, inf) so slightly negative round-off is tolerated; matrices failing
/// the PSD invariant beyond SpdMat2::kPsdTol are rejected with
/// std::invalid_argument.
SpdMat2 spd_sqrt(const SpdMat2& m);

/// Inverse of a strictly positive definite matrix.
SpdMat2 spd_inverse(const SpdMat2& m);

inline double max_abs_entry(const SpdMat2& m) {
  return std::max({std::abs(m.a), std::abs(m.b), std::abs(m.d)});
}

}  // namespace wbcbf
