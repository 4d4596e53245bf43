#include <doctest.h>

#include <cmath>
#include <limits>

#include "wbcbf/qp.hpp"
#include "wbcbf/rng.hpp"
#include "wbcbf/selftest.hpp"

using namespace wbcbf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QpProblem unconstrained_projection(const Eigen::Vector2d& target) {
  QpProblem p;
  p.H = 2.0 * Eigen::Matrix2d::Identity();
  p.f = -2.0 * target;
  p.A.resize(0, 2);
  p.b.resize(0);
  p.lb = Eigen::Vector2d::Constant(-kInf);
  p.ub = Eigen::Vector2d::Constant(kInf);
  return p;
}

}  // namespace

TEST_CASE("unconstrained minimum is the target") {
  const QpSolution s = solve_qp(unconstrained_projection({1.5, -2.0}));
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(s.x[1] == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(s.kkt.max_residual() <= 1e-6);
}

TEST_CASE("projection onto a halfspace") {
  QpProblem p;
  p.H = 2.0 * Eigen::Matrix2d::Identity();
  p.f = Eigen::Vector2d::Zero();
  p.A = Eigen::MatrixXd(1, 2);
  p.A << 1.0, 1.0;
  p.b = Eigen::VectorXd::Constant(1, 2.0);
  p.lb = Eigen::Vector2d::Constant(-kInf);
  p.ub = Eigen::Vector2d::Constant(kInf);
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.x[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("active bounds") {
  QpProblem p = unconstrained_projection({5.0, -5.0});
  p.lb = Eigen::Vector2d(-1.0, -1.0);
  p.ub = Eigen::Vector2d(1.0, 1.0);
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.x[1] == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("infeasible problem is detected") {
  QpProblem p;
  p.H = 2.0 * Eigen::MatrixXd::Identity(1, 1);
  p.f = Eigen::VectorXd::Zero(1);
  p.A = Eigen::MatrixXd(2, 1);
  p.A << 1.0, -1.0;  // x >= 1 and -x >= 1
  p.b = Eigen::VectorXd::Constant(2, 1.0);
  p.lb = Eigen::VectorXd::Constant(1, -kInf);
  p.ub = Eigen::VectorXd::Constant(1, kInf);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::infeasible);
}

TEST_CASE("kkt residuals certified at optimum") {
  RngStream rng(61, 0);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng.next_unit() * 6);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng.next_normal();
    QpProblem p;
    p.H = M.transpose() * M + 0.5 * Eigen::MatrixXd::Identity(n, n);
    p.f = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.next_normal(); });
    p.A = Eigen::MatrixXd::NullaryExpr(3, n, [&](Eigen::Index, Eigen::Index) {
      return rng.next_normal();
    });
    p.b = Eigen::VectorXd::Constant(3, -1.0);
    p.lb = Eigen::VectorXd::Constant(n, -5.0);
    p.ub = Eigen::VectorXd::Constant(n, 5.0);
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    CHECK(s.kkt.stationarity <= 1e-6);
    CHECK(s.kkt.primal <= 1e-6);
    CHECK(s.kkt.complementarity <= 1e-6);
  }
}

TEST_CASE("argmin is invariant to positive cost scaling") {
  QpProblem p;
  p.H = Eigen::Matrix2d::Identity();
  p.f = Eigen::Vector2d(1.0, -2.0);
  p.A = Eigen::MatrixXd(1, 2);
  p.A << 1.0, 2.0;
  p.b = Eigen::VectorXd::Constant(1, 1.0);
  p.lb = Eigen::Vector2d::Constant(-10.0);
  p.ub = Eigen::Vector2d::Constant(10.0);
  QpOptions tight;
  tight.tol = 1e-9;
  tight.max_iter = 20000;
  const QpSolution a = solve_qp(p, tight);
  QpProblem q = p;
  q.H *= 1000.0;
  q.f *= 1000.0;
  const QpSolution b = solve_qp(q, tight);
  REQUIRE(a.status == QpStatus::optimal);
  REQUIRE(b.status == QpStatus::optimal);
  CHECK(std::abs(a.x[0] - b.x[0]) <= 1e-8);
  CHECK(std::abs(a.x[1] - b.x[1]) <= 1e-8);
}

TEST_CASE("warm start re-solves in a handful of iterations") {
  QpProblem p;
  p.H = 2.0 * Eigen::Matrix2d::Identity();
  p.f = Eigen::Vector2d(-2.0, -4.0);
  p.A = Eigen::MatrixXd(2, 2);
  p.A << 1.0, 1.0, -1.0, 2.0;
  p.b = Eigen::VectorXd(2);
  p.b << 1.0, -3.0;
  p.lb = Eigen::Vector2d::Constant(-10.0);
  p.ub = Eigen::Vector2d::Constant(10.0);
  const QpSolution cold = solve_qp(p);
  REQUIRE(cold.status == QpStatus::optimal);
  QpOptions warm_opts;
  warm_opts.warm = &cold;
  const QpSolution warm = solve_qp(p, warm_opts);
  REQUIRE(warm.status == QpStatus::optimal);
  CHECK(warm.iterations <= 5);
  CHECK((warm.x - cold.x).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("solver matches the active-set enumeration oracle") {
  const auto res = selftest::check_qp_active_set(60);
  INFO(res.detail);
  CHECK(res.pass);
  CHECK(res.max_residual <= 1e-5);
}

TEST_CASE("dimension mismatches are rejected") {
  QpProblem p;
  p.H = Eigen::Matrix2d::Identity();
  p.f = Eigen::Vector3d::Zero();  // wrong size
  p.A.resize(0, 2);
  p.b.resize(0);
  p.lb = Eigen::Vector2d::Constant(-kInf);
  p.ub = Eigen::Vector2d::Constant(kInf);
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);
}
