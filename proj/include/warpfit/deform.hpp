#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "warpfit/empirical.hpp"

namespace warpfit {

// Axis-aligned parameter box.
struct ParamBox {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(std::span<const double> lambda, double slack = 0.0) const;
  void clamp(std::span<double> lambda) const;
};

// A parametric family of strictly increasing warping maps x -> apply(lambda, x),
// stored in the direction applied to data to recover the common errors.
class DeformationFamily {
 public:
  virtual ~DeformationFamily() = default;

  virtual int param_dim() const = 0;
  virtual const ParamBox& param_box() const = 0;
  // Parameters at which apply is the identity map.
  virtual std::vector<double> identity_params() const = 0;
  virtual std::string id() const = 0;

  virtual double apply(std::span<const double> lambda, double x) const = 0;
  virtual double inverse(std::span<const double> lambda, double y) const = 0;
  virtual double dx(std::span<const double> lambda, double x) const = 0;
  virtual std::vector<double> dparam(std::span<const double> lambda, double x) const = 0;
  // Hessian with respect to lambda, row-major p x p.
  virtual std::vector<double> dparam2(std::span<const double> lambda, double x) const = 0;

  // Warps a batch in place-ish; the default loops over apply, concrete
  // families override with a tight loop since this sits inside the
  // alignment objective.
  virtual void apply_many(std::span<const double> lambda, std::span<const double> x,
                          std::span<double> out) const;

  void require_in_box(std::span<const double> lambda) const;
};

std::shared_ptr<const DeformationFamily> location_scale_family();
std::shared_ptr<const DeformationFamily> location_scale_family(ParamBox box);
std::shared_ptr<const DeformationFamily> scale_family();
std::shared_ptr<const DeformationFamily> scale_family(ParamBox box);
std::shared_ptr<const DeformationFamily> location_family();
std::shared_ptr<const DeformationFamily> location_family(ParamBox box);
std::shared_ptr<const DeformationFamily> identity_family();

// Looks up "location-scale", "scale", "location" or "identity".
std::shared_ptr<const DeformationFamily> family_by_id(const std::string& id);

// Wraps a forward map given as a plain callable; parameter derivatives come
// from central finite differences with step 1e-5 * (1 + |lambda_k|), the
// inverse from bisection. Meant for prototyping new families.
std::shared_ptr<const DeformationFamily> finite_difference_family(
    std::function<double(std::span<const double>, double)> apply, ParamBox box,
    std::vector<double> identity, std::string id);

// Deformation parameters for J samples with one block pinned to a reference
// value for identifiability.
struct ParameterVector {
  std::vector<std::vector<double>> thetas;  // J blocks of p values
  int ref_index = 0;
  std::vector<double> ref_value;

  static ParameterVector pinned_identity(const DeformationFamily& fam, int J, int ref_index);

  int blocks() const { return static_cast<int>(thetas.size()); }
  void validate(const DeformationFamily& fam) const;
};

QuantileFunction push_quantile(const EmpiricalDistribution& d, const DeformationFamily& fam,
                               std::span<const double> lambda);

// Max of dx over a grid x grid lattice of the parameter box times x_range;
// an under-estimate whose resolution is the caller's grid.
double lipschitz_bound(const DeformationFamily& fam, double x_lo, double x_hi, int grid);

// The composed map psi_j(lambda, x) = apply(lambda, inverse(theta_star_j, x))
// and its parameter gradient, used by the limit-law functionals.
double psi_value(const DeformationFamily& fam, std::span<const double> theta_star_j,
                 std::span<const double> lambda, double x);
std::vector<double> psi_dparam(const DeformationFamily& fam,
                               std::span<const double> theta_star_j,
                               std::span<const double> lambda, double x);

}  // namespace warpfit
