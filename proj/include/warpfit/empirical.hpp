#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "warpfit/common.hpp"

namespace warpfit {

// A sorted sample; its step quantile function is the left-continuous
// generalized inverse t -> x_(ceil(n t)).
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution from_samples(std::span<const double> raw);

  const std::vector<double>& values() const { return values_; }
  std::int64_t n() const { return static_cast<std::int64_t>(values_.size()); }

 private:
  std::vector<double> values_;
};

// Piecewise-constant quantile function: value levels[k] on the cell
// (breakpoints[k-1], breakpoints[k]], with breakpoints[0] preceded by 0.
struct QuantileFunction {
  std::vector<double> breakpoints;  // strictly increasing, last == 1
  std::vector<double> levels;       // nondecreasing, same length

  QuantileFunction() = default;
  QuantileFunction(std::vector<double> bps, std::vector<double> lvls);

  static QuantileFunction of(const EmpiricalDistribution& d);

  double operator()(double t) const;
};

double quantile(const EmpiricalDistribution& d, double t);

double wasserstein_r(const EmpiricalDistribution& a, const EmpiricalDistribution& b, double r);
double wasserstein_r(const QuantileFunction& a, const QuantileFunction& b, double r);

QuantileFunction barycenter_quantile(std::span<const QuantileFunction> qs);

double variation_r(std::span<const EmpiricalDistribution> ds, double r);
double variation_r(std::span<const QuantileFunction> qs, double r);

// Quantile function of the measure attaining the variation infimum
// (the pointwise minimizer over the merged grid; the barycenter for r = 2).
QuantileFunction variation_minimizer(std::span<const QuantileFunction> qs, double r);

// Exact optimum of the multimarginal transport program with cost
// T(y_1..y_J) = min_z (1/J) sum_j |y_j - z|^r, solved as a linear program
// over the coupling tensor. Returns V_r^r. Tiny instances only.
double multimarginal_variation_oracle(std::span<const EmpiricalDistribution> ds, double r);

// The optimal coupling itself, row-major over the multi-index grid
// (last sample fastest). Weights sum to one and every marginal is uniform.
struct Coupling {
  std::vector<std::int64_t> shape;  // n_1 .. n_J
  std::vector<double> weights;
  double cost = 0.0;

  double marginal(std::size_t j, std::int64_t i) const;
};
Coupling multimarginal_variation_coupling(std::span<const EmpiricalDistribution> ds, double r);

EmpiricalDistribution resample(const EmpiricalDistribution& d, std::int64_t m,
                               RandomStream& stream);

// Merged breakpoint grid of J step quantile functions with n_j equispaced
// breakpoints each. Cell c has width `width[c]` and sample j is at level
// index `index[j][c]` there. Built exactly with integer arithmetic.
struct MergedGrid {
  std::vector<double> width;
  std::vector<std::vector<std::int32_t>> index;
  bool uniform = false;  // all samples share one grid; index[j][c] == c

  static MergedGrid build(std::span<const std::int64_t> sizes);

  std::size_t cells() const { return width.size(); }

  // (1/J) sum_j integral (w_j - wbar)^2 over the grid, with w_j the level
  // arrays of the (already warped) samples.
  double mean_squared_spread(std::span<const double* const> levels) const;
};

}  // namespace warpfit
