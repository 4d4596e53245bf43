#include "wbcbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace wbcbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigma = 1e-6;
constexpr double kAlpha = 1.6;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEpsInfeas = 1e-4;
constexpr int kCheckEvery = 25;

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Row-compressed form of the stacked constraint matrix [A; I]. The epigraph
// and rate rows are a few nonzeros each, which makes the splitting iteration
// cheap; density is never assumed.
struct StackedCsr {
  Eigen::Index rows = 0, cols = 0;
  std::vector<int> ptr, idx;
  std::vector<double> val;

  static StackedCsr build(const Eigen::MatrixXd& A, Eigen::Index n) {
    StackedCsr c;
    const Eigen::Index ma = A.rows();
    c.rows = ma + n;
    c.cols = n;
    c.ptr.reserve(static_cast<std::size_t>(c.rows) + 1);
    c.ptr.push_back(0);
    for (Eigen::Index i = 0; i < ma; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (A(i, j) != 0.0) {
          c.idx.push_back(static_cast<int>(j));
          c.val.push_back(A(i, j));
        }
      }
      c.ptr.push_back(static_cast<int>(c.idx.size()));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      c.idx.push_back(static_cast<int>(j));
      c.val.push_back(1.0);
      c.ptr.push_back(static_cast<int>(c.idx.size()));
    }
    return c;
  }

  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    for (Eigen::Index i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (int k = ptr[i]; k < ptr[i + 1]; ++k) acc += val[static_cast<std::size_t>(k)] * x[idx[static_cast<std::size_t>(k)]];
      out[i] = acc;
    }
  }

  void multiply_transpose(const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
    out.setZero();
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double yi = y[i];
      if (yi == 0.0) continue;
      for (int k = ptr[i]; k < ptr[i + 1]; ++k) out[idx[static_cast<std::size_t>(k)]] += val[static_cast<std::size_t>(k)] * yi;
    }
  }

  // out += rho * C' C as a dense accumulation (small column counts).
  void add_gram(double rho, Eigen::MatrixXd& out) const {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (int a = ptr[i]; a < ptr[i + 1]; ++a) {
        const double va = rho * val[static_cast<std::size_t>(a)];
        const int ja = idx[static_cast<std::size_t>(a)];
        for (int b = ptr[i]; b < ptr[i + 1]; ++b) {
          out(ja, idx[static_cast<std::size_t>(b)]) += va * val[static_cast<std::size_t>(b)];
        }
      }
    }
  }

  void scale(const Eigen::VectorXd& row_scale, const Eigen::VectorXd& col_scale) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (int k = ptr[i]; k < ptr[i + 1]; ++k) {
        val[static_cast<std::size_t>(k)] *= row_scale[i] * col_scale[idx[static_cast<std::size_t>(k)]];
      }
    }
  }

  double row_abs_max(Eigen::Index i) const {
    double m = 0.0;
    for (int k = ptr[i]; k < ptr[i + 1]; ++k) m = std::max(m, std::abs(val[static_cast<std::size_t>(k)]));
    return m;
  }

  void col_abs_max(Eigen::VectorXd& out) const {
    out.setZero();
    for (std::size_t k = 0; k < val.size(); ++k) {
      out[idx[k]] = std::max(out[idx[k]], std::abs(val[k]));
    }
  }
};

struct Scaling {
  Eigen::VectorXd d;  // variable scaling
  Eigen::VectorXd e;  // row scaling
  double cost = 1.0;
};

// Modified Ruiz equilibration of [P C'; C 0] plus cost normalization.
Scaling ruiz_equilibrate(Eigen::MatrixXd& P, Eigen::VectorXd& q, StackedCsr& C) {
  const Eigen::Index n = P.rows();
  const Eigen::Index m = C.rows;
  Scaling s;
  s.d = Eigen::VectorXd::Ones(n);
  s.e = Eigen::VectorXd::Ones(m);
  auto clamp_scale = [](double v) { return std::clamp(v, 1e-4, 1e4); };

  Eigen::VectorXd ccol(n), dj(n), ei(m);
  for (int pass = 0; pass < 10; ++pass) {
    C.col_abs_max(ccol);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double cn = std::max(inf_norm(P.col(j)), ccol[j]);
      dj[j] = cn > 0.0 ? clamp_scale(1.0 / std::sqrt(cn)) : 1.0;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const double rn = C.row_abs_max(i);
      ei[i] = rn > 0.0 ? clamp_scale(1.0 / std::sqrt(rn)) : 1.0;
    }
    P = dj.asDiagonal() * P * dj.asDiagonal();
    q = dj.cwiseProduct(q);
    C.scale(ei, dj);
    s.d = s.d.cwiseProduct(dj);
    s.e = s.e.cwiseProduct(ei);

    double mean_col = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) mean_col += inf_norm(P.col(j));
    mean_col /= static_cast<double>(n);
    const double g = std::max(mean_col, inf_norm(q));
    const double gamma = g > 0.0 ? clamp_scale(1.0 / g) : 1.0;
    P *= gamma;
    q *= gamma;
    s.cost *= gamma;
  }
  return s;
}

// Tests whether dy is a primal-infeasibility certificate direction at the
// given relative tolerance: C'dy ~ 0, no push on absent bounds, and negative
// support function.
bool infeasibility_certificate(const StackedCsr& C, const Eigen::VectorXd& l,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& dy,
                               Eigen::VectorXd& work_n, double eps) {
  const double norm_dy = inf_norm(dy);
  if (norm_dy < 1e-12) return false;
  C.multiply_transpose(dy, work_n);
  if (inf_norm(work_n) > eps * norm_dy) return false;
  double support = 0.0;
  for (Eigen::Index i = 0; i < dy.size(); ++i) {
    const double yp = std::max(dy[i], 0.0);
    const double yn = std::min(dy[i], 0.0);
    if (yp > 0.0) {
      if (!std::isfinite(u[i])) {
        if (yp > eps * norm_dy) return false;
      } else {
        support += u[i] * yp;
      }
    }
    if (yn < 0.0) {
      if (!std::isfinite(l[i])) {
        if (-yn > eps * norm_dy) return false;
      } else {
        support += l[i] * yn;
      }
    }
  }
  return support <= -eps * norm_dy;
}

}  // namespace

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_iter: return "max_iter";
  }
  return "?";
}

double KktResiduals::max_residual() const {
  return std::max({stationarity, primal, complementarity});
}

double qp_objective(const QpProblem& p, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(p.H * x) + p.f.dot(x);
}

QpSolution solve_qp(const QpProblem& p, const QpOptions& opts) {
  const Eigen::Index n = p.num_vars();
  const Eigen::Index ma = p.num_rows();
  const Eigen::Index m = ma + n;
  if (p.f.size() != n || p.lb.size() != n || p.ub.size() != n ||
      (ma > 0 && (p.A.cols() != n || p.b.size() != ma))) {
    throw std::invalid_argument("solve_qp: inconsistent problem dimensions");
  }

  // Stacked constraints l <= C x <= u with C = [A; I].
  const StackedCsr C = StackedCsr::build(p.A, n);
  Eigen::VectorXd l(m), u(m);
  if (ma > 0) l.head(ma) = p.b;
  u.head(ma).setConstant(kInf);
  l.tail(n) = p.lb;
  u.tail(n) = p.ub;

  Eigen::MatrixXd Ps = p.H;
  Eigen::VectorXd qs = p.f;
  StackedCsr Cs = C;
  const Scaling sc = ruiz_equilibrate(Ps, qs, Cs);
  const Eigen::VectorXd ls = sc.e.cwiseProduct(l);
  const Eigen::VectorXd us = sc.e.cwiseProduct(u);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  if (opts.warm != nullptr && opts.warm->x.size() == n && opts.warm->y.size() == m) {
    x = opts.warm->x.cwiseQuotient(sc.d);
    y = sc.cost * opts.warm->y.cwiseQuotient(sc.e);
  }
  Eigen::VectorXd z(m);
  Cs.multiply(x, z);
  z = z.cwiseMax(ls).cwiseMin(us);

  double rho = 0.1;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd K(n, n);
  auto refactor = [&]() {
    K = Ps;
    K.diagonal().array() += kSigma;
    Cs.add_gram(rho, K);
    llt.compute(K);
  };
  refactor();

  QpSolution sol;
  sol.status = QpStatus::max_iter;
  Eigen::VectorXd y_prev_check = y;
  double prim_prev_check = kInf;

  // Preallocated iteration workspace.
  Eigen::VectorXd rhs(n), xt(n), ct(m), v(m), work_n(n), work_m(m), xu(n), yu(m);

  auto unscale = [&]() {
    xu = sc.d.cwiseProduct(x);
    yu = sc.e.cwiseProduct(y) / sc.cost;
  };

  int it = 0;
  for (; it <= opts.max_iter; ++it) {
    const bool check_now = (it % kCheckEvery == 0 && (it > 0 || opts.warm != nullptr)) ||
                           it == opts.max_iter;
    if (check_now) {
      unscale();
      KktResiduals kkt;
      C.multiply(xu, work_m);
      double prim = 0.0, comp = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        prim = std::max({prim, l[i] - work_m[i], work_m[i] - u[i]});
        const double yp = std::max(yu[i], 0.0);
        const double yn = std::max(-yu[i], 0.0);
        if (yp > 0.0) {
          comp = std::max(comp, std::isfinite(u[i]) ? yp * std::abs(u[i] - work_m[i]) : yp);
        }
        if (yn > 0.0) {
          comp = std::max(comp, std::isfinite(l[i]) ? yn * std::abs(work_m[i] - l[i]) : yn);
        }
      }
      kkt.primal = std::max(prim, 0.0);
      kkt.complementarity = comp;
      C.multiply_transpose(yu, work_n);
      work_n += p.H * xu + p.f;
      kkt.stationarity = inf_norm(work_n);

      if (kkt.max_residual() <= opts.tol) {
        sol.x = xu;
        sol.y = yu;
        sol.status = QpStatus::optimal;
        sol.kkt = kkt;
        sol.iterations = it;
        return sol;
      }
      bool suspect_infeasible = false;
      if (it > 0) {
        const Eigen::VectorXd dy = sc.e.cwiseProduct(y - y_prev_check) / sc.cost;
        if (kkt.primal > 10.0 * opts.tol &&
            infeasibility_certificate(C, l, u, dy, work_n, kEpsInfeas)) {
          sol.x = xu;
          sol.y = yu;
          sol.status = QpStatus::infeasible;
          sol.kkt = kkt;
          sol.iterations = it;
          return sol;
        }
        suspect_infeasible = infeasibility_certificate(C, l, u, dy, work_n, 0.05);
      }
      y_prev_check = y;
      if (it == opts.max_iter) {
        sol.x = xu;
        sol.y = yu;
        sol.kkt = kkt;
        sol.iterations = it;
        return sol;
      }
      // A stagnant primal residual combined with a near-certificate dual
      // direction marks a likely infeasible problem; harden the constraints
      // so the divergence direction sharpens enough for the strict test.
      if (suspect_infeasible && kkt.primal > opts.tol &&
          kkt.primal > 0.9 * prim_prev_check) {
        if (rho < kRhoMax) {
          rho = std::min(rho * 10.0, kRhoMax);
          refactor();
        }
      } else {
        // Step-size adaptation from the scaled residual balance.
        Cs.multiply(x, work_m);
        const double rp =
            inf_norm(work_m - z) / std::max({inf_norm(work_m), inf_norm(z), 1e-10});
        Cs.multiply_transpose(y, work_n);
        const double dual_scale = inf_norm(work_n);
        work_n += Ps * x + qs;
        const double rd = inf_norm(work_n) /
                          std::max({inf_norm(Ps * x), inf_norm(qs), dual_scale, 1e-10});
        const double rho_new =
            std::clamp(rho * std::sqrt(rp / std::max(rd, 1e-16)), kRhoMin, kRhoMax);
        if (rho_new > 5.0 * rho || rho_new < rho / 5.0) {
          rho = rho_new;
          refactor();
        }
      }
      prim_prev_check = kkt.primal;
    }

    Cs.multiply_transpose(rho * z - y, rhs);
    rhs += kSigma * x - qs;
    xt = llt.solve(rhs);
    Cs.multiply(xt, ct);
    x = kAlpha * xt + (1.0 - kAlpha) * x;
    v = kAlpha * ct + (1.0 - kAlpha) * z + y / rho;
    const auto z_next = v.cwiseMax(ls).cwiseMin(us);
    y = rho * (v - z_next);  // v already carries y/rho
    z = z_next;
  }

  return sol;  // unreachable
}

}  // namespace wbcbf
