#pragma once

#include <Eigen/Dense>
#include <string>

namespace wbcbf {

enum class QpStatus { optimal, infeasible, max_iter };

std::string to_string(QpStatus s);

/// Dense convex QP in standard form:
///   min 1/2 x'Hx + f'x   s.t.  A x >= b,  lb <= x <= ub.
/// H must be symmetric positive semidefinite; +-inf bounds are allowed.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A;  // m x n; m == 0 means no general rows
  Eigen::VectorXd b;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  Eigen::Index num_vars() const { return H.rows(); }
  Eigen::Index num_rows() const { return A.rows(); }
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;

  double max_residual() const;
};

/// status == optimal guarantees every KKT residual <= the solve tolerance.
/// y holds multipliers for the stacked rows [A; I] (general rows first, then
/// variable bounds); positive entries push against upper bounds, negative
/// against lower. Keep the solution around to warm-start the next solve.
struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  QpStatus status = QpStatus::max_iter;
  KktResiduals kkt;
  int iterations = 0;
};

struct QpOptions {
  double tol = 1e-6;
  int max_iter = 4000;
  const QpSolution* warm = nullptr;  // previous solution of a same-shape problem
};

/// Operator-splitting (over-relaxed alternating projections) solve with
/// Ruiz equilibration and step-size adaptation. Infeasibility is detected
/// from the divergence direction of the dual iterate.
QpSolution solve_qp(const QpProblem& p, const QpOptions& opts = {});

double qp_objective(const QpProblem& p, const Eigen::VectorXd& x);

}  // namespace wbcbf
