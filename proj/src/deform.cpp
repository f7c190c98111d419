#include "warpfit/deform.hpp"

#include <algorithm>
#include <cmath>

namespace warpfit {

bool ParamBox::contains(std::span<const double> lambda, double slack) const {
  if (lambda.size() != lo.size()) return false;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (lambda[k] < lo[k] - slack || lambda[k] > hi[k] + slack) return false;
  }
  return true;
}

void ParamBox::clamp(std::span<double> lambda) const {
  for (std::size_t k = 0; k < lo.size(); ++k)
    lambda[k] = std::clamp(lambda[k], lo[k], hi[k]);
}

void DeformationFamily::apply_many(std::span<const double> lambda, std::span<const double> x,
                                   std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = apply(lambda, x[i]);
}

void DeformationFamily::require_in_box(std::span<const double> lambda) const {
  if (lambda.size() != static_cast<std::size_t>(param_dim()))
    throw error(errc::param_out_of_box, "parameter block has wrong dimension for " + id());
  if (!param_box().contains(lambda, 1e-12))
    throw error(errc::param_out_of_box, "parameter lies outside the box of " + id());
}

namespace {

// phi_(mu,sigma)(x) = (x - mu) / sigma, the map recovering the errors of a
// location-scale sample.
class LocationScaleFamily final : public DeformationFamily {
 public:
  explicit LocationScaleFamily(ParamBox box) : box_(std::move(box)) {
    if (box_.dim() != 2 || !(box_.lo[1] > 0.0))
      throw error(errc::bad_argument, "location-scale box needs dim 2 and sigma > 0");
  }

  int param_dim() const override { return 2; }
  const ParamBox& param_box() const override { return box_; }
  std::vector<double> identity_params() const override { return {0.0, 1.0}; }
  std::string id() const override { return "location-scale"; }

  double apply(std::span<const double> l, double x) const override { return (x - l[0]) / l[1]; }
  double inverse(std::span<const double> l, double y) const override { return l[0] + l[1] * y; }
  double dx(std::span<const double> l, double) const override { return 1.0 / l[1]; }
  std::vector<double> dparam(std::span<const double> l, double x) const override {
    return {-1.0 / l[1], -(x - l[0]) / (l[1] * l[1])};
  }
  std::vector<double> dparam2(std::span<const double> l, double x) const override {
    double s2 = l[1] * l[1];
    return {0.0, 1.0 / s2, 1.0 / s2, 2.0 * (x - l[0]) / (s2 * l[1])};
  }
  void apply_many(std::span<const double> l, std::span<const double> x,
                  std::span<double> out) const override {
    const double mu = l[0], inv = 1.0 / l[1];
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mu) * inv;
  }

 private:
  ParamBox box_;
};

class ScaleFamily final : public DeformationFamily {
 public:
  explicit ScaleFamily(ParamBox box) : box_(std::move(box)) {
    if (box_.dim() != 1 || !(box_.lo[0] > 0.0))
      throw error(errc::bad_argument, "scale box needs dim 1 and sigma > 0");
  }

  int param_dim() const override { return 1; }
  const ParamBox& param_box() const override { return box_; }
  std::vector<double> identity_params() const override { return {1.0}; }
  std::string id() const override { return "scale"; }

  double apply(std::span<const double> l, double x) const override { return l[0] * x; }
  double inverse(std::span<const double> l, double y) const override { return y / l[0]; }
  double dx(std::span<const double> l, double) const override { return l[0]; }
  std::vector<double> dparam(std::span<const double>, double x) const override { return {x}; }
  std::vector<double> dparam2(std::span<const double>, double) const override { return {0.0}; }
  void apply_many(std::span<const double> l, std::span<const double> x,
                  std::span<double> out) const override {
    const double s = l[0];
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
  }

 private:
  ParamBox box_;
};

class LocationFamily final : public DeformationFamily {
 public:
  explicit LocationFamily(ParamBox box) : box_(std::move(box)) {
    if (box_.dim() != 1) throw error(errc::bad_argument, "location box needs dim 1");
  }

  int param_dim() const override { return 1; }
  const ParamBox& param_box() const override { return box_; }
  std::vector<double> identity_params() const override { return {0.0}; }
  std::string id() const override { return "location"; }

  double apply(std::span<const double> l, double x) const override { return x - l[0]; }
  double inverse(std::span<const double> l, double y) const override { return y + l[0]; }
  double dx(std::span<const double>, double) const override { return 1.0; }
  std::vector<double> dparam(std::span<const double>, double) const override { return {-1.0}; }
  std::vector<double> dparam2(std::span<const double>, double) const override { return {0.0}; }
  void apply_many(std::span<const double> l, std::span<const double> x,
                  std::span<double> out) const override {
    const double mu = l[0];
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - mu;
  }

 private:
  ParamBox box_;
};

// Degenerate one-member family; handy for tests of the no-warp case.
class IdentityFamily final : public DeformationFamily {
 public:
  IdentityFamily() : box_{{0.0}, {0.0}} {}

  int param_dim() const override { return 1; }
  const ParamBox& param_box() const override { return box_; }
  std::vector<double> identity_params() const override { return {0.0}; }
  std::string id() const override { return "identity"; }

  double apply(std::span<const double>, double x) const override { return x; }
  double inverse(std::span<const double>, double y) const override { return y; }
  double dx(std::span<const double>, double) const override { return 1.0; }
  std::vector<double> dparam(std::span<const double>, double) const override { return {0.0}; }
  std::vector<double> dparam2(std::span<const double>, double) const override { return {0.0}; }
  void apply_many(std::span<const double>, std::span<const double> x,
                  std::span<double> out) const override {
    std::copy(x.begin(), x.end(), out.begin());
  }

 private:
  ParamBox box_;
};

class FiniteDiffFamily final : public DeformationFamily {
 public:
  FiniteDiffFamily(std::function<double(std::span<const double>, double)> apply, ParamBox box,
                   std::vector<double> identity, std::string id)
      : apply_(std::move(apply)), box_(std::move(box)), identity_(std::move(identity)),
        id_(std::move(id)) {}

  int param_dim() const override { return static_cast<int>(box_.dim()); }
  const ParamBox& param_box() const override { return box_; }
  std::vector<double> identity_params() const override { return identity_; }
  std::string id() const override { return id_; }

  double apply(std::span<const double> l, double x) const override { return apply_(l, x); }

  double inverse(std::span<const double> l, double y) const override {
    // Bisection on the increasing map; bracket by doubling.
    double lo = y, hi = y;
    double step = 1.0 + std::abs(y);
    while (apply_(l, lo) > y) lo -= step, step *= 2.0;
    step = 1.0 + std::abs(y);
    while (apply_(l, hi) < y) hi += step, step *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
      double mid = 0.5 * (lo + hi);
      (apply_(l, mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  double dx(std::span<const double> l, double x) const override {
    double h = 1e-6 * (1.0 + std::abs(x));
    return (apply_(l, x + h) - apply_(l, x - h)) / (2.0 * h);
  }

  std::vector<double> dparam(std::span<const double> l, double x) const override {
    std::vector<double> g(l.size());
    std::vector<double> probe(l.begin(), l.end());
    for (std::size_t k = 0; k < l.size(); ++k) {
      double h = 1e-5 * (1.0 + std::abs(l[k]));
      probe[k] = l[k] + h;
      double up = apply_(probe, x);
      probe[k] = l[k] - h;
      double dn = apply_(probe, x);
      probe[k] = l[k];
      g[k] = (up - dn) / (2.0 * h);
    }
    return g;
  }

  std::vector<double> dparam2(std::span<const double> l, double x) const override {
    const std::size_t p = l.size();
    std::vector<double> hess(p * p);
    std::vector<double> probe(l.begin(), l.end());
    auto grad_at = [&](std::size_t k, double v) {
      probe[k] = v;
      auto g = dparam(probe, x);
      probe[k] = l[k];
      return g;
    };
    for (std::size_t k = 0; k < p; ++k) {
      double h = 1e-4 * (1.0 + std::abs(l[k]));
      auto up = grad_at(k, l[k] + h);
      auto dn = grad_at(k, l[k] - h);
      for (std::size_t m = 0; m < p; ++m) hess[k * p + m] = (up[m] - dn[m]) / (2.0 * h);
    }
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t m = k + 1; m < p; ++m) {
        double sym = 0.5 * (hess[k * p + m] + hess[m * p + k]);
        hess[k * p + m] = hess[m * p + k] = sym;
      }
    return hess;
  }

 private:
  std::function<double(std::span<const double>, double)> apply_;
  ParamBox box_;
  std::vector<double> identity_;
  std::string id_;
};

}  // namespace

std::shared_ptr<const DeformationFamily> location_scale_family(ParamBox box) {
  return std::make_shared<LocationScaleFamily>(std::move(box));
}
std::shared_ptr<const DeformationFamily> location_scale_family() {
  return location_scale_family(ParamBox{{-30.0, 0.02}, {30.0, 30.0}});
}
std::shared_ptr<const DeformationFamily> scale_family(ParamBox box) {
  return std::make_shared<ScaleFamily>(std::move(box));
}
std::shared_ptr<const DeformationFamily> scale_family() {
  return scale_family(ParamBox{{0.02}, {30.0}});
}
std::shared_ptr<const DeformationFamily> location_family(ParamBox box) {
  return std::make_shared<LocationFamily>(std::move(box));
}
std::shared_ptr<const DeformationFamily> location_family() {
  return location_family(ParamBox{{-30.0}, {30.0}});
}
std::shared_ptr<const DeformationFamily> identity_family() {
  return std::make_shared<IdentityFamily>();
}

std::shared_ptr<const DeformationFamily> family_by_id(const std::string& id) {
  if (id == "location-scale") return location_scale_family();
  if (id == "scale") return scale_family();
  if (id == "location") return location_family();
  if (id == "identity") return identity_family();
  throw error(errc::invalid_spec, "unknown deformation family '" + id + "'");
}

std::shared_ptr<const DeformationFamily> finite_difference_family(
    std::function<double(std::span<const double>, double)> apply, ParamBox box,
    std::vector<double> identity, std::string id) {
  return std::make_shared<FiniteDiffFamily>(std::move(apply), std::move(box),
                                            std::move(identity), std::move(id));
}

ParameterVector ParameterVector::pinned_identity(const DeformationFamily& fam, int J,
                                                 int ref_index) {
  if (J < 1 || ref_index < 0 || ref_index >= J)
    throw error(errc::bad_argument, "reference index must lie in [0, J)");
  ParameterVector theta;
  theta.thetas.assign(J, fam.identity_params());
  theta.ref_index = ref_index;
  theta.ref_value = fam.identity_params();
  return theta;
}

void ParameterVector::validate(const DeformationFamily& fam) const {
  if (thetas.empty()) throw error(errc::bad_argument, "parameter vector has no blocks");
  if (ref_index < 0 || ref_index >= blocks())
    throw error(errc::bad_argument, "reference index must lie in [0, J)");
  if (thetas[ref_index] != ref_value)
    throw error(errc::bad_argument, "reference block must equal the pinned value");
  for (const auto& block : thetas) fam.require_in_box(block);
}

QuantileFunction push_quantile(const EmpiricalDistribution& d, const DeformationFamily& fam,
                               std::span<const double> lambda) {
  fam.require_in_box(lambda);
  QuantileFunction q = QuantileFunction::of(d);
  std::vector<double> warped(q.levels.size());
  fam.apply_many(lambda, q.levels, warped);
  q.levels = std::move(warped);
  return q;
}

double lipschitz_bound(const DeformationFamily& fam, double x_lo, double x_hi, int grid) {
  if (grid < 2) throw error(errc::bad_argument, "lipschitz_bound needs grid >= 2");
  const auto& box = fam.param_box();
  const int p = fam.param_dim();
  std::vector<double> lambda(p);
  std::vector<int> pos(p, 0);
  double best = 0.0;
  while (true) {
    for (int k = 0; k < p; ++k) {
      double f = static_cast<double>(pos[k]) / (grid - 1);
      lambda[k] = box.lo[k] + f * (box.hi[k] - box.lo[k]);
    }
    for (int g = 0; g < grid; ++g) {
      double x = x_lo + (x_hi - x_lo) * static_cast<double>(g) / (grid - 1);
      best = std::max(best, fam.dx(lambda, x));
    }
    int k = 0;
    for (; k < p; ++k) {
      if (++pos[k] < grid) break;
      pos[k] = 0;
    }
    if (k == p) break;
  }
  return best;
}

double psi_value(const DeformationFamily& fam, std::span<const double> theta_star_j,
                 std::span<const double> lambda, double x) {
  return fam.apply(lambda, fam.inverse(theta_star_j, x));
}

std::vector<double> psi_dparam(const DeformationFamily& fam,
                               std::span<const double> theta_star_j,
                               std::span<const double> lambda, double x) {
  return fam.dparam(lambda, fam.inverse(theta_star_j, x));
}

}  // namespace warpfit
