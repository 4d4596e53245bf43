#include "wbcbf/risk.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace wbcbf {

double barrier(const Vec2& z_v, const Vec2& z_o, const BarrierParams& p) {
  return (z_v - z_o).norm() - p.keep_out();
}

CbcSample make_cbc_sample(const Vec2& vehicle_now, const Vec2& vehicle_next_nom,
                          const Mat2& jac_pos_u, const Vec2& obstacle_now,
                          const Vec2& obstacle_next, double alpha_dt,
                          const BarrierParams& p) {
  const double h_now = barrier(vehicle_now, obstacle_now, p);
  const double h_next = barrier(vehicle_next_nom, obstacle_next, p);

  CbcSample out;
  out.const_term = h_next - h_now + alpha_dt * h_now;

  const Vec2 delta = vehicle_next_nom - obstacle_next;
  const double dist = delta.norm();
  if (dist > 0.0) {
    const Vec2 dir{delta.x / dist, delta.y / dist};
    const Vec2 g = jac_pos_u.transposed() * dir;
    out.grad_u = g;
  }
  return out;
}

CbcSampleSet build_cbc_samples(const Gaussian2& ego_dist, const Gaussian2& wb_dist,
                               const VehicleState& s, const ControlInput& u_nom,
                               const Vec2& obstacle_vel, const BarrierParams& p,
                               int ego_count, int barycenter_count, double dt,
                               double wheelbase, RngStream& rng) {
  if (ego_count < 1 || barycenter_count < 1) {
    throw std::invalid_argument("build_cbc_samples: sample counts must be >= 1");
  }
  const Vec2 next_nom = vehicle_step(s, u_nom, dt, wheelbase).pos;
  const Mat2 jac = vehicle_step_jacobian_u(s, u_nom, dt, wheelbase);
  const double alpha_dt = p.alpha_gain * dt;

  std::vector<Vec2> ego_draws(static_cast<std::size_t>(ego_count));
  for (auto& z : ego_draws) z = gaussian_sample(ego_dist, rng);
  std::vector<Vec2> wb_draws(static_cast<std::size_t>(barycenter_count));
  for (auto& z : wb_draws) z = gaussian_sample(wb_dist, rng);

  CbcSampleSet set;
  set.ego_count = ego_count;
  set.barycenter_count = barycenter_count;
  set.u_nom = u_nom;
  set.samples.reserve(static_cast<std::size_t>(ego_count) * barycenter_count);
  for (const Vec2& z_v : ego_draws) {
    const Vec2 err = z_v - s.pos;
    const Vec2 v_next = next_nom + err;
    for (const Vec2& z_o : wb_draws) {
      set.samples.push_back(
          make_cbc_sample(z_v, v_next, jac, z_o, z_o + dt * obstacle_vel, alpha_dt, p));
    }
  }
  return set;
}

namespace {

// Clamped tail size ceil(N*eps) in [1, N].
std::size_t tail_count(std::size_t n, double epsilon) {
  const double k = std::ceil(static_cast<double>(n) * epsilon);
  return static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(n)));
}

std::vector<double> smallest_k(std::span<const double> values, std::size_t k) {
  std::vector<double> v(values.begin(), values.end());
  std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
  v.resize(k);
  return v;
}

}  // namespace

double empirical_var(std::span<const double> values, double epsilon) {
  if (values.empty()) throw std::invalid_argument("empirical_var: empty sample list");
  const std::size_t k = tail_count(values.size(), epsilon);
  auto tail = smallest_k(values, k);
  return *std::max_element(tail.begin(), tail.end());
}

double empirical_cvar(std::span<const double> values, double epsilon) {
  if (values.empty()) throw std::invalid_argument("empirical_cvar: empty sample list");
  const std::size_t k = tail_count(values.size(), epsilon);
  auto tail = smallest_k(values, k);
  double sum = 0.0;
  for (double t : tail) sum += t;
  return sum / static_cast<double>(k);
}

double ru_function(std::span<const double> values, double epsilon, double gamma) {
  if (values.empty()) throw std::invalid_argument("ru_function: empty sample list");
  double hinge_sum = 0.0;
  for (double v : values) hinge_sum += std::max(gamma - v, 0.0);
  const double n_eps = static_cast<double>(values.size()) * epsilon;
  return gamma - hinge_sum / n_eps;
}

EpigraphRows epigraph_rows(const CbcSampleSet& set, double epsilon) {
  const Eigen::Index n_samples = static_cast<Eigen::Index>(set.samples.size());
  if (n_samples == 0) throw std::invalid_argument("epigraph_rows: empty sample set");
  const double n_eps = static_cast<double>(n_samples) * epsilon;
  if (n_eps < 1.0) {
    std::cerr << "[wbcbf] warning: N*epsilon = " << n_eps
              << " < 1; the sampled tail is a single worst draw\n";
  }

  // Variables x = (u0, u1, gamma, slack_1..N).
  const Eigen::Index n_vars = n_samples + 3;
  EpigraphRows rows;
  rows.A = Eigen::MatrixXd::Zero(2 * n_samples + 1, n_vars);
  rows.b = Eigen::VectorXd::Zero(2 * n_samples + 1);

  for (Eigen::Index i = 0; i < n_samples; ++i) {
    rows.A(i, 3 + i) = 1.0;  // slack_i >= 0
  }
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    const CbcSample& smp = set.samples[static_cast<std::size_t>(i)];
    // slack_i + CBC_i(u) - gamma >= 0 with CBC_i affine around u_nom.
    const Eigen::Index r = n_samples + i;
    rows.A(r, 0) = smp.grad_u.x;
    rows.A(r, 1) = smp.grad_u.y;
    rows.A(r, 2) = -1.0;
    rows.A(r, 3 + i) = 1.0;
    rows.b(r) = smp.grad_u.x * set.u_nom.accel + smp.grad_u.y * set.u_nom.steer -
                smp.const_term;
  }
  const Eigen::Index last = 2 * n_samples;
  rows.A(last, 2) = 1.0;
  for (Eigen::Index i = 0; i < n_samples; ++i) rows.A(last, 3 + i) = -1.0 / n_eps;
  return rows;
}

}  // namespace wbcbf
