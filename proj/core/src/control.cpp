#include "wbcbf/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wbcbf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}  // namespace

ReferencePath::ReferencePath(std::vector<std::pair<Vec2, double>> waypoints) {
  if (waypoints.size() < 2) {
    throw std::invalid_argument("ReferencePath: need at least two waypoints");
  }
  pts_.reserve(waypoints.size());
  speeds_.reserve(waypoints.size());
  arcs_.reserve(waypoints.size());
  double arc = 0.0;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const auto& [p, v] = waypoints[i];
    if (i > 0) {
      const double seg = (p - pts_.back()).norm();
      if (seg <= 0.0) {
        throw std::invalid_argument("ReferencePath: consecutive waypoints must be distinct");
      }
      arc += seg;
    }
    pts_.push_back(p);
    speeds_.push_back(v);
    arcs_.push_back(arc);
  }
}

double ReferencePath::project(const Vec2& p) const {
  double best_d2 = kInf;
  double best_s = 0.0;
  for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
    const Vec2 a = pts_[i];
    const Vec2 ab = pts_[i + 1] - a;
    const double len2 = ab.squared_norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    const Vec2 q = a + t * ab;
    const double d2 = (p - q).squared_norm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = arcs_[i] + t * std::sqrt(len2);
    }
  }
  return best_s;
}

ReferencePath::Sample ReferencePath::sample(double s) const {
  s = std::clamp(s, 0.0, length());
  std::size_t i = 0;
  while (i + 2 < pts_.size() && arcs_[i + 1] < s) ++i;
  const double seg = arcs_[i + 1] - arcs_[i];
  const double t = (s - arcs_[i]) / seg;
  const Vec2 dir = pts_[i + 1] - pts_[i];
  Sample out;
  out.pos = pts_[i] + t * dir;
  out.heading = std::atan2(dir.y, dir.x);
  out.speed = speeds_[i] + t * (speeds_[i + 1] - speeds_[i]);
  return out;
}

ControlInput InputLimits::clamp(const ControlInput& u) const {
  return {std::clamp(u.accel, accel_min, accel_max),
          std::clamp(u.steer, steer_min, steer_max)};
}

namespace {

using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using Vec4 = Eigen::Vector4d;

}  // namespace

ControlInput mpc_nominal(const VehicleState& s, const ReferencePath& path,
                         const MpcConfig& cfg, MpcSolveInfo* info, QpSolution* warm) {
  const int H = cfg.horizon;
  const double dt = cfg.dt;
  const int nu = 2 * H;

  // Nominal rollout at zero input: constant speed along the current heading.
  // Linearization of the Euler-discretized bicycle around that rollout.
  std::vector<Vec4> bar(H + 1);
  bar[0] << s.pos.x, s.pos.y, s.heading, s.speed;
  const double cth = std::cos(s.heading);
  const double sth = std::sin(s.heading);
  for (int i = 0; i < H; ++i) {
    bar[i + 1] = bar[i];
    bar[i + 1][0] += dt * bar[i][3] * cth;
    bar[i + 1][1] += dt * bar[i][3] * sth;
  }
  Mat4 Ai = Mat4::Identity();
  Ai(0, 3) = dt * cth;
  Ai(1, 3) = dt * sth;
  Ai(0, 2) = -dt * s.speed * sth;
  Ai(1, 2) = dt * s.speed * cth;
  Mat42 Bi = Mat42::Zero();
  Bi(2, 1) = dt * s.speed / cfg.wheelbase;
  Bi(3, 0) = dt;

  // References marched along the path from the current projection.
  std::vector<Vec4> ref(H + 1);
  double arc = path.project(s.pos);
  for (int i = 1; i <= H; ++i) {
    arc += path.sample(arc).speed * dt;
    const auto r = path.sample(arc);
    ref[i] << r.pos.x, r.pos.y, r.heading, r.speed;
  }

  // Deviation stacking: e_{i+1} = A e_i + B u_i, e_0 = 0.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(4 * H, nu);
  for (int i = 0; i < H; ++i) {
    if (i > 0) S.middleRows(4 * i, 4) = Ai * S.middleRows(4 * (i - 1), 4);
    S.block(4 * i, 2 * i, 4, 2) = Bi;
  }
  Eigen::VectorXd d(4 * H);
  for (int i = 1; i <= H; ++i) {
    Vec4 e = bar[i] - ref[i];
    e[2] = wrap_angle(e[2]);
    d.segment(4 * (i - 1), 4) = e;
  }

  Eigen::VectorXd qdiag(4 * H), rdiag(nu);
  for (int i = 0; i < H; ++i) {
    qdiag.segment(4 * i, 4) << cfg.q_pos, cfg.q_pos, cfg.q_heading, cfg.q_speed;
    rdiag.segment(2 * i, 2) << cfg.r_accel, cfg.r_steer;
  }

  QpProblem qp;
  qp.H = 2.0 * (S.transpose() * qdiag.asDiagonal() * S);
  qp.H.diagonal() += 2.0 * rdiag;
  qp.f = 2.0 * S.transpose() * qdiag.cwiseProduct(d);
  qp.lb = Eigen::VectorXd(nu);
  qp.ub = Eigen::VectorXd(nu);
  for (int i = 0; i < H; ++i) {
    qp.lb.segment(2 * i, 2) << cfg.limits.accel_min, cfg.limits.steer_min;
    qp.ub.segment(2 * i, 2) << cfg.limits.accel_max, cfg.limits.steer_max;
  }
  // Input-rate rows within the horizon.
  const int nrate = 4 * (H - 1);
  qp.A = Eigen::MatrixXd::Zero(nrate, nu);
  qp.b = Eigen::VectorXd(nrate);
  for (int i = 1; i < H; ++i) {
    for (int c = 0; c < 2; ++c) {
      const double lim = (c == 0 ? cfg.accel_rate : cfg.steer_rate) * dt;
      const int r = 4 * (i - 1) + 2 * c;
      qp.A(r, 2 * i + c) = 1.0;
      qp.A(r, 2 * (i - 1) + c) = -1.0;
      qp.b(r) = -lim;
      qp.A(r + 1, 2 * i + c) = -1.0;
      qp.A(r + 1, 2 * (i - 1) + c) = 1.0;
      qp.b(r + 1) = -lim;
    }
  }

  QpOptions opts;
  opts.tol = cfg.qp_tol;
  opts.max_iter = cfg.qp_max_iter;
  if (warm != nullptr && warm->x.size() == nu) opts.warm = warm;
  const QpSolution sol = solve_qp(qp, opts);
  if (info != nullptr) {
    info->status = sol.status;
    info->kkt = sol.kkt;
    info->iterations = sol.iterations;
    info->fallback = sol.status != QpStatus::optimal;
  }
  if (sol.status != QpStatus::optimal) {
    return cfg.limits.max_braking();
  }
  if (warm != nullptr) *warm = sol;
  return cfg.limits.clamp({sol.x[0], sol.x[1]});
}

namespace {

FilterDecision solve_single_cbc(const ControlInput& u_nom, const CbcSample& smp,
                                const FilterOptions& opts) {
  FilterDecision dec;
  dec.u_nom = u_nom;
  dec.gamma = kNan;
  if (smp.const_term >= 0.0) {
    dec.u_safe = u_nom;
    return dec;
  }
  dec.active = true;

  QpProblem qp;
  qp.H = Eigen::Matrix2d::Identity();
  qp.f = Eigen::Vector2d(-u_nom.accel, -u_nom.steer);
  qp.A = Eigen::MatrixXd(1, 2);
  qp.A << smp.grad_u.x, smp.grad_u.y;
  qp.b = Eigen::VectorXd(1);
  qp.b << smp.grad_u.x * u_nom.accel + smp.grad_u.y * u_nom.steer - smp.const_term;
  qp.lb = Eigen::Vector2d(opts.limits.accel_min, opts.limits.steer_min);
  qp.ub = Eigen::Vector2d(opts.limits.accel_max, opts.limits.steer_max);

  QpOptions qopts;
  qopts.tol = opts.qp_tol;
  qopts.max_iter = opts.qp_max_iter;
  if (opts.warm != nullptr && opts.warm->x.size() == 2) qopts.warm = opts.warm;
  const QpSolution sol = solve_qp(qp, qopts);
  dec.solver_status = sol.status;
  dec.kkt = sol.kkt;
  if (sol.status != QpStatus::optimal) {
    dec.u_safe = opts.limits.max_braking();
    dec.fallback = true;
    return dec;
  }
  if (opts.warm != nullptr) *opts.warm = sol;
  dec.u_safe = opts.limits.clamp({sol.x[0], sol.x[1]});
  return dec;
}

}  // namespace

FilterDecision filter_cbf_baseline(const ControlInput& u_nom, const VehicleState& s,
                                   const Gaussian2& ego_meas,
                                   const std::vector<std::pair<SensorKind, Gaussian2>>& obstacle_meas,
                                   const Vec2& obstacle_vel, const BarrierParams& p,
                                   const FilterOptions& opts) {
  if (obstacle_meas.empty()) {
    throw std::invalid_argument("filter_cbf_baseline: no obstacle measurements");
  }
  Vec2 mean_point;
  for (const auto& [kind, g] : obstacle_meas) mean_point = mean_point + g.mean;
  mean_point = (1.0 / static_cast<double>(obstacle_meas.size())) * mean_point;

  const Vec2 err = ego_meas.mean - s.pos;
  const Vec2 v_next = vehicle_step(s, u_nom, opts.dt, opts.wheelbase).pos + err;
  const Mat2 jac = vehicle_step_jacobian_u(s, u_nom, opts.dt, opts.wheelbase);
  const CbcSample smp =
      make_cbc_sample(ego_meas.mean, v_next, jac, mean_point,
                      mean_point + opts.dt * obstacle_vel, p.alpha_gain * opts.dt, p);
  return solve_single_cbc(u_nom, smp, opts);
}

FilterDecision solve_cvar_epigraph(const CbcSampleSet& set, double epsilon,
                                   const FilterOptions& opts) {
  const ControlInput u_nom = set.u_nom;
  const Eigen::Index N = static_cast<Eigen::Index>(set.samples.size());
  std::vector<double> at_nominal(set.samples.size());
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    at_nominal[i] = set.samples[i].const_term;
  }

  FilterDecision dec;
  dec.u_nom = u_nom;
  // The nominal input already meets the CVaR constraint: pass through, the
  // reported gamma is the tail quantile it would certify.
  if (empirical_cvar(at_nominal, epsilon) >= 0.0) {
    dec.u_safe = u_nom;
    dec.gamma = empirical_var(at_nominal, epsilon);
    return dec;
  }
  dec.active = true;

  const double n_eps = static_cast<double>(N) * epsilon;
  const Eigen::Index n_vars = N + 3;
  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(n_vars, n_vars);
  qp.H(0, 0) = 1.0;
  qp.H(1, 1) = 1.0;
  qp.f = Eigen::VectorXd::Zero(n_vars);
  qp.f[0] = -u_nom.accel;
  qp.f[1] = -u_nom.steer;
  qp.f[2] = -opts.gamma_tiebreak;
  qp.f.tail(N).setConstant(opts.gamma_tiebreak / n_eps);

  EpigraphRows rows = epigraph_rows(set, epsilon);
  qp.A = std::move(rows.A);
  qp.b = std::move(rows.b);
  qp.lb = Eigen::VectorXd::Constant(n_vars, -kInf);
  qp.ub = Eigen::VectorXd::Constant(n_vars, kInf);
  qp.lb[0] = opts.limits.accel_min;
  qp.lb[1] = opts.limits.steer_min;
  qp.ub[0] = opts.limits.accel_max;
  qp.ub[1] = opts.limits.steer_max;

  QpOptions qopts;
  qopts.tol = opts.qp_tol;
  qopts.max_iter = opts.qp_max_iter;
  if (opts.warm != nullptr && opts.warm->x.size() == n_vars) qopts.warm = opts.warm;
  const QpSolution sol = solve_qp(qp, qopts);
  dec.solver_status = sol.status;
  dec.kkt = sol.kkt;
  if (sol.status != QpStatus::optimal) {
    dec.u_safe = opts.limits.max_braking();
    dec.gamma = kNan;
    dec.fallback = true;
    return dec;
  }
  if (opts.warm != nullptr) *opts.warm = sol;
  dec.u_safe = opts.limits.clamp({sol.x[0], sol.x[1]});
  dec.gamma = sol.x[2];
  return dec;
}

FilterDecision filter_wb_cvar_cbf(const ControlInput& u_nom, const VehicleState& s,
                                  const Gaussian2& ego_meas, const Gaussian2& wb,
                                  const Vec2& obstacle_vel, const BarrierParams& p,
                                  int ego_samples, int barycenter_samples, RngStream& rng,
                                  const FilterOptions& opts) {
  const CbcSampleSet set =
      build_cbc_samples(ego_meas, wb, s, u_nom, obstacle_vel, p, ego_samples,
                        barycenter_samples, opts.dt, opts.wheelbase, rng);
  return solve_cvar_epigraph(set, p.epsilon, opts);
}

}  // namespace wbcbf
