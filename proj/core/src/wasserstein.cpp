#include "wbcbf/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wbcbf {

namespace {

// (R M R) symmetrized, for symmetric R and M.
SpdMat2 sandwich(const SpdMat2& r, const SpdMat2& m) {
  return symmetrize(r.as_mat2() * m.as_mat2() * r.as_mat2());
}

SpdMat2 clamp_psd(SpdMat2 m) {
  // Round-off from products can push an eigenvalue slightly negative.
  SymEig2 e = sym_eig(m);
  if (e.l2 >= 0.0) return m;
  const double l1 = std::max(e.l1, 0.0);
  const Vec2& u = e.v1;
  return {l1 * u.x * u.x, l1 * u.x * u.y, l1 * u.y * u.y};
}

}  // namespace

double gaussian_w2_distance(const Gaussian2& g1, const Gaussian2& g2) {
  const SpdMat2 s2 = spd_sqrt(g2.cov);
  const SpdMat2 cross = spd_sqrt(clamp_psd(sandwich(s2, g1.cov)));
  const double tr = g1.cov.trace() + g2.cov.trace() - 2.0 * cross.trace();
  const double d2 = (g1.mean - g2.mean).squared_norm() + std::max(tr, 0.0);
  return std::sqrt(std::max(d2, 0.0));
}

BarycenterResult gaussian_barycenter(std::span<const std::pair<double, Gaussian2>> inputs,
                                     const BarycenterOptions& opts) {
  if (inputs.empty()) {
    throw std::invalid_argument("gaussian_barycenter: no inputs");
  }
  double wsum = 0.0;
  for (const auto& [w, g] : inputs) {
    if (!(w > 0.0)) throw std::invalid_argument("gaussian_barycenter: weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw std::invalid_argument("gaussian_barycenter: weights must sum to 1");
  }

  BarycenterResult res;
  for (const auto& [w, g] : inputs) {
    res.fused.mean = res.fused.mean + w * g.mean;
  }

  bool any_pd = false;
  std::vector<std::pair<double, SpdMat2>> covs;
  covs.reserve(inputs.size());
  for (const auto& [w, g] : inputs) {
    SpdMat2 c = g.cov;
    if (c.det() > 0.0 && c.a > 0.0) any_pd = true;
    c.a += opts.regularization;
    c.d += opts.regularization;
    covs.emplace_back(w, c);
  }
  if (!any_pd) {
    // Point-mass-only fusion still has a well-defined degenerate answer when
    // every input covariance is (numerically) zero: the weighted mean alone.
    double maxc = 0.0;
    for (const auto& [w, g] : inputs) maxc = std::max(maxc, max_abs_entry(g.cov));
    if (maxc <= opts.tol) {
      res.fused.cov = SpdMat2::zero();
      res.converged = true;
      res.residual = 0.0;
      return res;
    }
    res.converged = false;
    res.residual = maxc;
    return res;
  }

  SpdMat2 sigma = SpdMat2::zero();
  for (const auto& [w, c] : covs) sigma = sigma + w * c;

  for (int it = 0; it <= opts.max_iter; ++it) {
    const SpdMat2 root = spd_sqrt(sigma);
    SpdMat2 mean_root = SpdMat2::zero();
    for (const auto& [w, c] : covs) {
      mean_root = mean_root + w * spd_sqrt(clamp_psd(sandwich(root, c)));
    }
    res.residual = max_abs_entry(sigma - mean_root);
    res.iterations = it;
    if (res.residual <= opts.tol) {
      res.fused.cov = sigma;
      res.converged = true;
      return res;
    }
    if (it == opts.max_iter) break;
    const SpdMat2 root_inv = spd_inverse(root);
    const Mat2 m = mean_root.as_mat2();
    sigma = clamp_psd(symmetrize(root_inv.as_mat2() * (m * m) * root_inv.as_mat2()));
  }
  res.fused.cov = sigma;
  res.converged = false;
  return res;
}

Gaussian2 fuse_obstacle(const std::vector<std::pair<SensorKind, Gaussian2>>& meas,
                        const std::vector<SensorModel>& suite,
                        const BarycenterOptions& opts) {
  std::vector<std::pair<double, Gaussian2>> inputs;
  inputs.reserve(meas.size());
  for (const auto& [kind, g] : meas) {
    const SensorModel* model = nullptr;
    for (const auto& s : suite) {
      if (s.kind == kind) {
        model = &s;
        break;
      }
    }
    if (model == nullptr) {
      throw std::invalid_argument("fuse_obstacle: no weight for sensor " + to_string(kind));
    }
    inputs.emplace_back(model->weight, g);
  }
  const BarycenterResult res = gaussian_barycenter(inputs, opts);
  if (!res.converged) {
    throw std::runtime_error("fuse_obstacle: barycenter did not converge, residual " +
                             std::to_string(res.residual));
  }
  return res.fused;
}

}  // namespace wbcbf
