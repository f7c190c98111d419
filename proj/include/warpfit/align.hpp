#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "warpfit/deform.hpp"
#include "warpfit/empirical.hpp"

namespace warpfit {

struct OptimizerConfig {
  int restarts = 5;          // identity-adjacent start + Latin hypercube starts
  double fn_tol = 1e-10;     // simplex function-value spread
  double x_tol = 1e-8;       // simplex diameter
  std::int64_t max_evals = 0;  // per restart; 0 -> 2000 * p * (J - 1)
  std::uint64_t seed = 0;
  int threads = 1;
};

struct AlignmentResult {
  ParameterVector theta_hat;
  double cost = 0.0;
  std::int64_t evaluations = 0;
  bool converged = false;
  int restarts_used = 0;
};

// U_n(theta) = V_2^2 of the warped empirical measures.
double alignment_cost(std::span<const EmpiricalDistribution> ds, const DeformationFamily& fam,
                      const ParameterVector& theta);

// Multi-start Nelder-Mead over the free blocks with the reference pinned.
// Never throws on a stalled search: the best point found is returned with
// `converged` cleared.
AlignmentResult minimize_alignment(std::span<const EmpiricalDistribution> ds,
                                   const DeformationFamily& fam, int ref_index,
                                   const OptimizerConfig& config = {},
                                   std::optional<std::vector<double>> ref_value = std::nullopt);

// Exact minimizer of U_n over the scale family applied to the second sample:
// the ratio of the merged-grid integrals of F1^-1 F2^-1 and (F2^-1)^2.
double scale_closed_form(const EmpiricalDistribution& d1, const EmpiricalDistribution& d2);

}  // namespace warpfit
