#include "wbcbf/selftest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wbcbf/control.hpp"
#include "wbcbf/qp.hpp"
#include "wbcbf/report.hpp"
#include "wbcbf/rng.hpp"
#include "wbcbf/wasserstein.hpp"

namespace wbcbf {
namespace selftest {

bool SelftestReport::all_pass() const {
  return std::all_of(oracles.begin(), oracles.end(),
                     [](const OracleResult& r) { return r.pass; });
}

namespace {

SpdMat2 random_spd(RngStream& rng, double scale_min, double scale_max) {
  const double theta = rng.next_unit() * 6.283185307179586;
  const double c = std::cos(theta), s = std::sin(theta);
  const double l1 = scale_min + (scale_max - scale_min) * rng.next_unit();
  const double l2 = scale_min + (scale_max - scale_min) * rng.next_unit();
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

}  // namespace

OracleResult check_barycenter_commuting(int random_trials) {
  OracleResult res;
  res.name = "barycenter-commuting";
  RngStream rng(0x5eedc0de, 1);
  double worst = 0.0;

  // Study weights and noise levels: isotropic stds 0.1 / 0.2 / 1.0 with
  // weights 0.4 / 0.4 / 0.2 fuse to std 0.32 per axis.
  {
    std::vector<std::pair<double, Gaussian2>> in = {
        {0.4, {{0, 0}, SpdMat2::isotropic(0.01)}},
        {0.4, {{0, 0}, SpdMat2::isotropic(0.04)}},
        {0.2, {{0, 0}, SpdMat2::isotropic(1.0)}},
    };
    const BarycenterResult r = gaussian_barycenter(in);
    if (!r.converged) {
      res.detail = "study-weights case did not converge";
      return res;
    }
    worst = std::max(worst, std::abs(std::sqrt(r.fused.cov.a) - 0.32));
    worst = std::max(worst, std::abs(std::sqrt(r.fused.cov.d) - 0.32));
    if (worst > 1e-6) {
      res.max_residual = worst;
      res.detail = "fused std off the 0.32 closed form";
      return res;
    }
  }

  // Commuting triples: shared eigenbasis, fused covariance equals
  // (sum lambda_s S_s^1/2)^2 in that basis.
  for (int t = 0; t < random_trials / 2; ++t) {
    const double theta = rng.next_unit() * 6.283185307179586;
    const double c = std::cos(theta), s = std::sin(theta);
    double w1 = 0.1 + rng.next_unit(), w2 = 0.1 + rng.next_unit(), w3 = 0.1 + rng.next_unit();
    const double wsum = w1 + w2 + w3;
    w1 /= wsum; w2 /= wsum; w3 /= wsum;
    double e1 = 0.0, e2 = 0.0;
    std::vector<std::pair<double, Gaussian2>> in;
    for (double w : {w1, w2, w3}) {
      const double a = 0.02 + 2.0 * rng.next_unit();
      const double d = 0.02 + 2.0 * rng.next_unit();
      SpdMat2 cov{a * c * c + d * s * s, (a - d) * c * s, a * s * s + d * c * c};
      in.push_back({w, {{0, 0}, cov}});
      e1 += w * std::sqrt(a);
      e2 += w * std::sqrt(d);
    }
    const SpdMat2 expect{e1 * e1 * c * c + e2 * e2 * s * s,
                         (e1 * e1 - e2 * e2) * c * s,
                         e1 * e1 * s * s + e2 * e2 * c * c};
    const BarycenterResult r = gaussian_barycenter(in);
    if (!r.converged) {
      res.detail = "commuting trial did not converge";
      return res;
    }
    worst = std::max(worst, max_abs_entry(r.fused.cov - expect));
  }
  if (worst > 1e-9) {
    res.max_residual = worst;
    res.detail = "commuting closed form missed beyond 1e-9";
    return res;
  }

  // General SPD triples: the fixed-point defect itself is the certificate.
  double worst_defect = 0.0;
  for (int t = 0; t < random_trials; ++t) {
    double w1 = 0.05 + rng.next_unit(), w2 = 0.05 + rng.next_unit(), w3 = 0.05 + rng.next_unit();
    const double wsum = w1 + w2 + w3;
    std::vector<std::pair<double, Gaussian2>> in = {
        {w1 / wsum, {{0, 0}, random_spd(rng, 0.01, 3.0)}},
        {w2 / wsum, {{0, 0}, random_spd(rng, 0.01, 3.0)}},
        {w3 / wsum, {{0, 0}, random_spd(rng, 0.01, 3.0)}},
    };
    const BarycenterResult r = gaussian_barycenter(in);
    if (!r.converged) {
      res.detail = "random SPD trial did not converge";
      res.max_residual = r.residual;
      return res;
    }
    worst_defect = std::max(worst_defect, r.residual);
  }
  res.max_residual = std::max(worst, worst_defect);
  res.pass = worst_defect <= 1e-10;
  if (!res.pass) res.detail = "fixed-point defect above 1e-10";
  return res;
}

OracleResult check_cvar_grid(int lists, int grid_points, const RuFunction& ru_in) {
  OracleResult res;
  res.name = "cvar-grid";
  const RuFunction ru = ru_in ? ru_in : RuFunction([](std::span<const double> v, double e,
                                                      double g) { return ru_function(v, e, g); });
  RngStream rng(0x5eedc0de, 2);
  // N*eps is integer for every combination, and eps stays small enough that
  // the lower-tail quantile sits below the sample mean.
  const int sizes[] = {20, 40, 100, 200};
  const double epsilons[] = {0.05, 0.1, 0.2, 0.25};
  double worst = 0.0;

  for (int t = 0; t < lists; ++t) {
    const int n = sizes[t % 4];
    const double eps = epsilons[(t / 4) % 4];
    std::vector<double> v(static_cast<std::size_t>(n));
    const int mode = t % 3;
    for (double& x : v) {
      if (mode == 0) {
        x = -5.0 + 10.0 * rng.next_unit();
      } else if (mode == 1) {
        x = 3.0 * rng.next_normal();
      } else {
        x = -std::log(std::max(rng.next_unit(), 1e-300)) * 2.0 - 1.0;
      }
    }
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    const double step = (hi - lo) / static_cast<double>(grid_points);

    double best_val = -1e300, best_arg = lo, prev = 0.0, prev2 = 0.0;
    bool concave = true;
    for (int g = 0; g <= grid_points; ++g) {
      const double gamma = lo + step * g;
      const double val = ru(v, eps, gamma);
      if (val > best_val) {
        best_val = val;
        best_arg = gamma;
      }
      if (g >= 2 && (val - prev) - (prev - prev2) > 1e-9 * std::max(1.0, std::abs(val))) {
        concave = false;
      }
      prev2 = prev;
      prev = val;
    }

    const double cvar = empirical_cvar(v, eps);
    const double var = empirical_var(v, eps);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    worst = std::max(worst, std::abs(best_val - cvar));

    if (std::abs(best_val - cvar) > step + 1e-12) {
      res.max_residual = std::abs(best_val - cvar);
      res.detail = "grid max of the RU function missed the sorted-tail CVaR";
      return res;
    }
    if (!(cvar <= var + 1e-12 && var <= mean + 1e-12)) {
      res.detail = "tail ordering CVaR <= VaR <= mean violated";
      return res;
    }
    if (!concave) {
      res.detail = "RU function not concave in gamma";
      return res;
    }
    // The maximizer sits within one inter-sample gap of the VaR.
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    const auto pos = std::lower_bound(sorted.begin(), sorted.end(), var) - sorted.begin();
    const double gap_above = (pos + 1 < n) ? sorted[pos + 1] - var : 0.0;
    const double gap_below = (pos > 0) ? var - sorted[pos - 1] : 0.0;
    if (best_arg > var + gap_above + step || best_arg < var - gap_below - step) {
      res.detail = "RU maximizer further than one inter-sample gap from VaR";
      return res;
    }
  }
  res.max_residual = worst;
  res.pass = true;
  return res;
}

namespace {

// Exhaustive KKT enumeration for min 1/2 x'Hx + f'x s.t. A x >= b with H
// positive definite: any KKT-consistent subsystem is the global optimum.
bool active_set_oracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                       const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       Eigen::VectorXd* x_out) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = A.rows();
  const Eigen::Index kmax = std::min(n, m);

  std::vector<int> comb;
  std::function<bool(Eigen::Index, Eigen::Index)> search =
      [&](Eigen::Index start, Eigen::Index remaining) -> bool {
    if (remaining == 0) {
      const Eigen::Index k = static_cast<Eigen::Index>(comb.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
      kkt.topLeftCorner(n, n) = H;
      Eigen::VectorXd rhs(n + k);
      rhs.head(n) = -f;
      for (Eigen::Index j = 0; j < k; ++j) {
        kkt.block(n + j, 0, 1, n) = A.row(comb[static_cast<std::size_t>(j)]);
        kkt.block(0, n + j, n, 1) = -A.row(comb[static_cast<std::size_t>(j)]).transpose();
        rhs[n + j] = b[comb[static_cast<std::size_t>(j)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
      if (!lu.isInvertible()) return false;
      const Eigen::VectorXd sol = lu.solve(rhs);
      const Eigen::VectorXd x = sol.head(n);
      const Eigen::VectorXd mu = sol.tail(k);
      if ((mu.array() < -1e-8).any()) return false;
      if (m > 0 && ((A * x - b).array() < -1e-8).any()) return false;
      *x_out = x;
      return true;
    }
    for (Eigen::Index i = start; i + remaining <= m; ++i) {
      comb.push_back(static_cast<int>(i));
      if (search(i + 1, remaining - 1)) return true;
      comb.pop_back();
    }
    return false;
  };

  for (Eigen::Index k = 0; k <= kmax; ++k) {
    comb.clear();
    if (search(0, k)) return true;
  }
  return false;
}

}  // namespace

OracleResult check_qp_active_set(int instances) {
  OracleResult res;
  res.name = "qp-active-set";
  RngStream rng(0x5eedc0de, 3);
  double worst = 0.0;

  for (int t = 0; t < instances; ++t) {
    const int n = 1 + static_cast<int>(rng.next_unit() * 12.0);
    const int m = 1 + static_cast<int>(rng.next_unit() * 14.0);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng.next_normal();
    Eigen::MatrixXd H = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = 2.0 * rng.next_normal();
    Eigen::VectorXd x_feas(n);
    for (int i = 0; i < n; ++i) x_feas[i] = rng.next_normal();
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = rng.next_normal();
      b[i] = A.row(i).dot(x_feas) - (0.1 + rng.next_unit());
    }

    Eigen::VectorXd x_oracle;
    if (!active_set_oracle(H, f, A, b, &x_oracle)) {
      res.detail = "active-set enumeration found no KKT point";
      return res;
    }

    QpProblem p;
    p.H = H;
    p.f = f;
    p.A = A;
    p.b = b;
    p.lb = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    p.ub = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    QpOptions opts;
    opts.tol = 1e-8;
    opts.max_iter = 20000;
    const QpSolution sol = solve_qp(p, opts);
    if (sol.status != QpStatus::optimal) {
      res.detail = "solver failed on a strictly feasible instance";
      return res;
    }
    worst = std::max(worst, std::abs(qp_objective(p, sol.x) - qp_objective(p, x_oracle)));
  }
  res.max_residual = worst;
  res.pass = worst <= 1e-5;
  if (!res.pass) res.detail = "objective disagrees with enumeration beyond 1e-5";
  return res;
}

namespace {

struct CvarToy {
  CbcSampleSet set;
  double epsilon = 0.25;
  InputLimits limits;
  bool scalar = false;  // steer pinned, effectively 1D
};

double toy_cvar_at(const CvarToy& toy, const ControlInput& u) {
  std::vector<double> v(toy.set.samples.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const CbcSample& s = toy.set.samples[i];
    v[i] = s.const_term + s.grad_u.x * (u.accel - toy.set.u_nom.accel) +
           s.grad_u.y * (u.steer - toy.set.u_nom.steer);
  }
  return empirical_cvar(v, toy.epsilon);
}

// Brute-force projection of u_nom onto {CVaR(u) >= 0} within the input box.
// Split by which constraints are active at the optimum: project onto the
// CVaR set alone by a polar boundary sweep (if that lands inside the box it
// is the answer), otherwise the optimum lies on a box face, where the
// feasible set is a 1D interval and clamping the unconstrained face optimum
// into it is exact. Everything rests only on convexity of the CVaR set.
ControlInput brute_force_cvar(const CvarToy& toy) {
  const ControlInput u0 = toy.set.u_nom;
  const InputLimits& lim = toy.limits;
  auto cvar_ok = [&](double a, double s) { return toy_cvar_at(toy, {a, s}) >= 0.0; };
  auto in_box = [&](double a, double s) {
    return a >= lim.accel_min - 1e-12 && a <= lim.accel_max + 1e-12 &&
           s >= lim.steer_min - 1e-12 && s <= lim.steer_max + 1e-12;
  };
  if (in_box(u0.accel, u0.steer) && cvar_ok(u0.accel, u0.steer)) return u0;

  // Entry radius of the ray into the CVaR set (box ignored).
  const double rmax = 10.0 * std::hypot(lim.accel_max - lim.accel_min,
                                        std::max(lim.steer_max - lim.steer_min, 1.0));
  auto ray_entry = [&](double ca, double sa, double* r_out) {
    double lo = 0.0, hi = -1.0;
    constexpr int kScan = 2000;
    for (int i = 1; i <= kScan; ++i) {
      const double r = rmax * i / kScan;
      if (cvar_ok(u0.accel + r * ca, u0.steer + r * sa)) {
        hi = r;
        break;
      }
      lo = r;
    }
    if (hi < 0.0) return false;
    for (int b = 0; b < 60; ++b) {
      const double mid = 0.5 * (lo + hi);
      if (cvar_ok(u0.accel + mid * ca, u0.steer + mid * sa)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    *r_out = hi;
    return true;
  };

  ControlInput best = lim.max_braking();
  double best_obj = std::numeric_limits<double>::infinity();
  auto offer = [&](double a, double s) {
    if (!in_box(a, s) || !cvar_ok(a, s)) return;
    const double da = a - u0.accel, ds = s - u0.steer;
    const double obj = da * da + ds * ds;
    if (obj < best_obj) {
      best_obj = obj;
      best = {a, s};
    }
  };

  // Projection onto the CVaR set alone: r(phi) is unimodal because its
  // sublevel sets are the directions hitting a convex intersection.
  if (!cvar_ok(u0.accel, u0.steer) && !toy.scalar) {
    constexpr int kAngles = 1024;
    double center = 0.0;
    double halfwidth = 3.14159265358979323846;
    double best_r = std::numeric_limits<double>::infinity();
    double best_phi = 0.0;
    for (int level = 0; level < 3; ++level) {
      for (int i = 0; i < kAngles; ++i) {
        const double phi = center - halfwidth + 2.0 * halfwidth * i / (kAngles - 1);
        double r = 0.0;
        if (!ray_entry(std::cos(phi), std::sin(phi), &r)) continue;
        if (r < best_r) {
          best_r = r;
          best_phi = phi;
        }
      }
      center = best_phi;
      halfwidth = 8.0 * halfwidth / kAngles;
    }
    if (std::isfinite(best_r)) {
      offer(u0.accel + best_r * std::cos(best_phi), u0.steer + best_r * std::sin(best_phi));
    }
  }

  // Box faces: 1D segments on which the feasible set is an interval; the
  // face optimum is the line projection of u_nom clamped into it.
  auto face = [&](double ax, double sx, double ay, double sy) {
    // segment (ax,sx) .. (ay,sy), parameter t in [0,1]
    auto at = [&](double t) {
      return std::pair<double, double>{ax + t * (ay - ax), sx + t * (sy - sx)};
    };
    auto ok = [&](double t) {
      const auto [a, s] = at(t);
      return cvar_ok(a, s);
    };
    constexpr int kScan = 20000;
    int hit = -1;
    for (int i = 0; i <= kScan; ++i) {
      if (ok(static_cast<double>(i) / kScan)) {
        hit = i;
        break;
      }
    }
    if (hit < 0) return;
    double t_lo = static_cast<double>(hit) / kScan;
    double t_hi = t_lo;
    if (hit > 0) {
      double lo = static_cast<double>(hit - 1) / kScan, hi = t_lo;
      for (int b = 0; b < 60; ++b) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
      }
      t_lo = hi;
    }
    {
      // upper end: last feasible t
      double lo = t_hi, hi = 1.0;
      if (ok(1.0)) {
        t_hi = 1.0;
      } else {
        // bisect the exit point above the first feasible scan hit
        int exit_hint = hit;
        while (exit_hint < kScan && ok(static_cast<double>(exit_hint + 1) / kScan)) ++exit_hint;
        lo = static_cast<double>(exit_hint) / kScan;
        hi = std::min(1.0, static_cast<double>(exit_hint + 1) / kScan);
        for (int b = 0; b < 60; ++b) {
          const double mid = 0.5 * (lo + hi);
          (ok(mid) ? lo : hi) = mid;
        }
        t_hi = lo;
      }
    }
    const double len2 = (ay - ax) * (ay - ax) + (sy - sx) * (sy - sx);
    const double t_star =
        ((u0.accel - ax) * (ay - ax) + (u0.steer - sx) * (sy - sx)) / len2;
    const double t = std::clamp(t_star, t_lo, t_hi);
    const auto [a, s] = at(t);
    offer(a, s);
  };
  face(lim.accel_min, lim.steer_min, lim.accel_max, lim.steer_min);
  face(lim.accel_min, lim.steer_max, lim.accel_max, lim.steer_max);
  if (!toy.scalar) {
    face(lim.accel_min, lim.steer_min, lim.accel_min, lim.steer_max);
    face(lim.accel_max, lim.steer_min, lim.accel_max, lim.steer_max);
  }
  return best;
}

}  // namespace

OracleResult check_epigraph_bruteforce(int instances) {
  OracleResult res;
  res.name = "epigraph-bruteforce";
  RngStream rng(0x5eedc0de, 4);
  double worst = 0.0;

  for (int t = 0; t < instances; ++t) {
    CvarToy toy;
    toy.scalar = (t % 2 == 0);
    const int n = 1 + static_cast<int>(rng.next_unit() * 8.0);
    const int tail = 1 + static_cast<int>(rng.next_unit() * n);
    toy.epsilon = static_cast<double>(tail) / n;  // integer N*eps by construction
    if (toy.scalar) {
      const double pinned = toy.limits.steer_min +
                            (toy.limits.steer_max - toy.limits.steer_min) * rng.next_unit();
      toy.limits.steer_min = toy.limits.steer_max = pinned;
    }
    ControlInput u_nom{
        toy.limits.accel_min + (toy.limits.accel_max - toy.limits.accel_min) * rng.next_unit(),
        toy.limits.steer_min + (toy.limits.steer_max - toy.limits.steer_min) * rng.next_unit()};
    ControlInput u_feas{
        toy.limits.accel_min + (toy.limits.accel_max - toy.limits.accel_min) * rng.next_unit(),
        toy.limits.steer_min + (toy.limits.steer_max - toy.limits.steer_min) * rng.next_unit()};
    toy.set.u_nom = u_nom;
    toy.set.ego_count = n;
    toy.set.barycenter_count = 1;
    for (int i = 0; i < n; ++i) {
      CbcSample s;
      s.grad_u = {(rng.next_unit() - 0.5) * 4.0, (rng.next_unit() - 0.5) * 4.0};
      const double margin = 0.5 + 1.5 * rng.next_unit();
      s.const_term = margin - s.grad_u.x * (u_feas.accel - u_nom.accel) -
                     s.grad_u.y * (u_feas.steer - u_nom.steer);
      toy.set.samples.push_back(s);
    }

    FilterOptions opts;
    opts.limits = toy.limits;
    opts.qp_tol = 1e-8;
    opts.qp_max_iter = 20000;
    const FilterDecision dec = solve_cvar_epigraph(toy.set, toy.epsilon, opts);
    if (dec.fallback) {
      res.detail = "epigraph QP reported failure on a feasible instance";
      return res;
    }
    const ControlInput u_bf = brute_force_cvar(toy);
    const double err = std::max(std::abs(dec.u_safe.accel - u_bf.accel),
                                std::abs(dec.u_safe.steer - u_bf.steer));
    if (err > worst) {
      worst = err;
      auto obj = [&](const ControlInput& u) {
        const double da = u.accel - toy.set.u_nom.accel;
        const double ds = u.steer - toy.set.u_nom.steer;
        return 0.5 * (da * da + ds * ds);
      };
      std::ostringstream det;
      det << "worst instance " << t << ": obj qp " << obj(dec.u_safe) << " vs brute force "
          << obj(u_bf) << ", cvar qp " << toy_cvar_at(toy, dec.u_safe) << " vs "
          << toy_cvar_at(toy, u_bf);
      res.detail = det.str();
    }
  }
  res.max_residual = worst;
  res.pass = worst <= 1e-4;
  if (res.pass) res.detail.clear();
  return res;
}

SelftestReport run_selftest() {
  SelftestReport rep;
  rep.oracles.push_back(check_barycenter_commuting());
  rep.oracles.push_back(check_cvar_grid());
  rep.oracles.push_back(check_qp_active_set());
  rep.oracles.push_back(check_epigraph_bruteforce());
  return rep;
}

std::string format_report(const SelftestReport& report) {
  std::ostringstream os;
  for (const auto& r : report.oracles) {
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  max residual "
       << format_double(r.max_residual);
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << '\n';
  }
  return os.str();
}

}  // namespace selftest
}  // namespace wbcbf
