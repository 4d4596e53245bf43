#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wbcbf/risk.hpp"

namespace wbcbf {
namespace selftest {

struct OracleResult {
  std::string name;
  bool pass = false;
  double max_residual = 0.0;
  std::string detail;
};

struct SelftestReport {
  std::vector<OracleResult> oracles;
  bool all_pass() const;
};

/// Closed-form check of the barycenter in the commuting case (shared
/// eigenbasis): fused covariance must equal (sum_s lambda_s S_s^1/2)^2, and
/// random SPD triples must converge with fixed-point defect <= 1e-10.
OracleResult check_barycenter_commuting(int random_trials = 1000);

using RuFunction = std::function<double(std::span<const double>, double, double)>;

/// Maximizes the given Rockafellar-Uryasev function over a dense gamma grid
/// and compares against the sorted-tail CVaR, the tail ordering
/// CVaR <= VaR <= mean, concavity in gamma, and the VaR location of the
/// maximizer. The function under test is injectable so a deliberately broken
/// variant is detected.
OracleResult check_cvar_grid(int lists = 500, int grid_points = 10000,
                             const RuFunction& ru = {});

/// Random strictly feasible dense QPs solved by exhaustive active-set
/// enumeration (every KKT subsystem) versus the iterative solver; objectives
/// must agree within 1e-5.
OracleResult check_qp_active_set(int instances = 100);

/// Random small sampled-CVaR instances solved through the epigraph QP versus
/// brute-force grid search over the un-reformulated feasible set; controls
/// must agree within 1e-4.
OracleResult check_epigraph_bruteforce(int instances = 100);

SelftestReport run_selftest();
std::string format_report(const SelftestReport& report);

}  // namespace selftest
}  // namespace wbcbf
