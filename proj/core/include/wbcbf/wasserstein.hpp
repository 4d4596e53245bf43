#pragma once

#include <span>
#include <utility>
#include <vector>

#include "wbcbf/geometry.hpp"
#include "wbcbf/sensing.hpp"

namespace wbcbf {

/// Output of the barycenter fixed-point iteration. residual is the entrywise
/// max defect of Sigma - sum_s lambda_s (Sigma^1/2 Sigma_s Sigma^1/2)^1/2 at
/// the returned covariance; converged implies residual <= tol.
struct BarycenterResult {
  Gaussian2 fused;
  int iterations = 0;
  double residual = 0.0;  // m^2
  bool converged = false;
};

struct BarycenterOptions {
  double tol = 1e-10;            // m^2, entrywise fixed-point defect
  int max_iter = 200;
  double regularization = 1e-12; // m^2 added to input diagonals; 5 orders
                                 // below sensor noise, kept in the output
};

/// 2-Wasserstein distance between planar Gaussians, closed form:
/// W2^2 = |m1-m2|^2 + tr(S1 + S2 - 2 (S2^1/2 S1 S2^1/2)^1/2).
double gaussian_w2_distance(const Gaussian2& g1, const Gaussian2& g2);

/// Weighted 2-Wasserstein barycenter of planar Gaussians. The fused mean is
/// the exact weighted average of input means; the covariance is computed by
/// the fixed-point map
///   S <- S^-1/2 (sum_s lambda_s (S^1/2 Sigma_s S^1/2)^1/2)^2 S^-1/2
/// initialized at the arithmetic mean of the input covariances.
///
/// Weights must be positive and sum to 1 within 1e-12 (std::invalid_argument
/// otherwise). All-degenerate inputs and non-convergence return
/// converged = false with the last residual.
BarycenterResult gaussian_barycenter(std::span<const std::pair<double, Gaussian2>> inputs,
                                     const BarycenterOptions& opts = {});

/// Fuses one obstacle measurement set with the suite's per-sensor weights.
/// Throws std::runtime_error if the barycenter iteration fails.
Gaussian2 fuse_obstacle(const std::vector<std::pair<SensorKind, Gaussian2>>& meas,
                        const std::vector<SensorModel>& suite,
                        const BarycenterOptions& opts = {});

}  // namespace wbcbf
