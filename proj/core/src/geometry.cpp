#include "wbcbf/geometry.hpp"

#include <stdexcept>

namespace wbcbf {

SymEig2 sym_eig(const SpdMat2& m) {
  SymEig2 e;
  const double half_tr = 0.5 * (m.a + m.d);
  const double half_gap = 0.5 * (m.a - m.d);
  const double r = std::hypot(half_gap, m.b);
  e.l1 = half_tr + r;
  e.l2 = half_tr - r;
  if (r <= 0.0) {
    e.v1 = {1.0, 0.0};
    e.v2 = {0.0, 1.0};
    return e;
  }
  // Eigenvector of l1; pick the better-conditioned of the two rows.
  Vec2 v{m.b, e.l1 - m.a};
  Vec2 w{e.l1 - m.d, m.b};
  if (w.squared_norm() > v.squared_norm()) v = w;
  const double n = v.norm();
  if (n > 0.0) {
    e.v1 = {v.x / n, v.y / n};
  } else {
    e.v1 = {1.0, 0.0};
  }
  e.v2 = {-e.v1.y, e.v1.x};
  return e;
}

namespace {

SpdMat2 rebuild(const SymEig2& e, double l1, double l2) {
  // Q diag(l1, l2) Q^T with Q = [v1 v2].
  const Vec2& u = e.v1;
  const Vec2& w = e.v2;
  return {l1 * u.x * u.x + l2 * w.x * w.x,
          l1 * u.x * u.y + l2 * w.x * w.y,
          l1 * u.y * u.y + l2 * w.y * w.y};
}

}  // namespace

SpdMat2 spd_sqrt(const SpdMat2& m) {
  if (!m.is_psd()) {
    throw std::invalid_argument("spd_sqrt: matrix is not positive semidefinite");
  }
  SymEig2 e = sym_eig(m);
  const double s1 = std::sqrt(std::max(e.l1, 0.0));
  const double s2 = std::sqrt(std::max(e.l2, 0.0));
  return rebuild(e, s1, s2);
}

SpdMat2 spd_inverse(const SpdMat2& m) {
  const double det = m.det();
  if (!(det > 0.0) || !(m.a > 0.0)) {
    throw std::invalid_argument("spd_inverse: matrix is not positive definite");
  }
  return {m.d / det, -m.b / det, m.a / det};
}

}  // namespace wbcbf
