#include <doctest.h>

#include <cmath>

#include "wbcbf/geometry.hpp"
#include "wbcbf/rng.hpp"

using namespace wbcbf;

namespace {

SpdMat2 random_psd(RngStream& rng) {
  // Rotation times nonnegative eigenvalues; occasionally rank deficient.
  const double theta = rng.next_unit() * 6.28318530717958648;
  const double c = std::cos(theta), s = std::sin(theta);
  const double l1 = 3.0 * rng.next_unit();
  const double l2 = (rng.next_unit() < 0.1) ? 0.0 : 3.0 * rng.next_unit();
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

SpdMat2 mul_sym(const SpdMat2& p, const SpdMat2& q) { return symmetrize(p.as_mat2() * q.as_mat2()); }

}  // namespace

TEST_CASE("spd_sqrt identity and diagonal") {
  const SpdMat2 i = spd_sqrt(SpdMat2::identity());
  CHECK(i.a == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(i.b == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(i.d == doctest::Approx(1.0).epsilon(1e-14));

  const SpdMat2 s = spd_sqrt({4.0, 0.0, 9.0});
  CHECK(s.a == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.b == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.d == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("spd_sqrt squares back") {
  const SpdMat2 m{2.0, 1.0, 2.0};
  const SpdMat2 s = spd_sqrt(m);
  const SpdMat2 sq = mul_sym(s, s);
  CHECK(std::abs(sq.a - m.a) <= 1e-12);
  CHECK(std::abs(sq.b - m.b) <= 1e-12);
  CHECK(std::abs(sq.d - m.d) <= 1e-12);
}

TEST_CASE("spd_sqrt rejects indefinite input") {
  CHECK_THROWS_AS(spd_sqrt({1.0, 2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(spd_sqrt({-1.0, 0.0, 1.0}), std::invalid_argument);
  // slightly negative determinant from round-off stays legal
  CHECK_NOTHROW(spd_sqrt({1.0, 1.0 + 1e-12, 1.0}));
}

TEST_CASE("spd_sqrt on 1000 random PSD matrices") {
  RngStream rng(17, 0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const SpdMat2 m = random_psd(rng);
    const SpdMat2 s = spd_sqrt(m);
    CHECK(s.is_psd());
    const SpdMat2 sq = mul_sym(s, s);
    worst = std::max(worst, max_abs_entry(sq - m));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("spd_sqrt commutes with rotations") {
  RngStream rng(18, 0);
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const SpdMat2 m = random_psd(rng);
    const double th = rng.next_unit() * 6.28318530717958648;
    const Mat2 r{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)};
    const SpdMat2 conj = symmetrize(r.transposed() * m.as_mat2() * r);
    const SpdMat2 lhs = spd_sqrt(conj);
    const SpdMat2 rhs = symmetrize(r.transposed() * spd_sqrt(m).as_mat2() * r);
    worst = std::max(worst, max_abs_entry(lhs - rhs));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("gaussian_sample point mass returns the mean") {
  RngStream rng(19, 0);
  const Gaussian2 g{{3.0, -4.0}, SpdMat2::zero()};
  for (int i = 0; i < 10; ++i) {
    const Vec2 x = gaussian_sample(g, rng);
    CHECK(x.x == 3.0);
    CHECK(x.y == -4.0);
  }
}

TEST_CASE("gaussian_sample law of large numbers") {
  RngStream rng(20, 0);
  const Gaussian2 g{{1.0, 2.0}, SpdMat2::identity()};
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 v = gaussian_sample(g, rng);
    sx += v.x;
    sy += v.y;
    const double dx = v.x - 1.0, dy = v.y - 2.0;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  CHECK(std::abs(sx / n - 1.0) < 0.02);
  CHECK(std::abs(sy / n - 2.0) < 0.02);
  CHECK(std::abs(sxx / n - 1.0) < 0.02);
  CHECK(std::abs(syy / n - 1.0) < 0.02);
  CHECK(std::abs(sxy / n) < 0.02);
}

TEST_CASE("rng determinism and stream independence") {
  RngStream a(123, 7);
  RngStream b(123, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c1 = RngStream(9, 1).child(4);
  RngStream c2 = RngStream(9, 1).child(4);
  for (int i = 0; i < 50; ++i) CHECK(c1.next_normal() == c2.next_normal());

  RngStream s0(55, 0), s1(55, 1);
  double corr = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) corr += s0.next_normal() * s1.next_normal();
  CHECK(std::abs(corr / n) < 0.05);
}

TEST_CASE("degenerate covariance sampling stays on the live axis") {
  RngStream rng(21, 0);
  const Gaussian2 g{{0.0, 0.0}, {1.0, 0.0, 0.0}};  // variance only in x
  for (int i = 0; i < 100; ++i) {
    const Vec2 v = gaussian_sample(g, rng);
    CHECK(v.y == 0.0);
  }
}
