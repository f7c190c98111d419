#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "warpfit/deform.hpp"
#include "warpfit/distributions.hpp"

namespace warpfit {

// Brownian bridge sampled on the interior grid t_k = k/(N+1), k = 1..N.
struct BridgePath {
  std::vector<double> values;

  std::int64_t grid_size() const { return static_cast<std::int64_t>(values.size()); }
  double t(std::int64_t k) const {
    return static_cast<double>(k + 1) / static_cast<double>(values.size() + 1);
  }
};

BridgePath sample_bridge(std::int64_t grid_size, RandomStream& stream);

// Quadrature weights on t_k = k/(N+1): trapezoid over [delta, 1-delta]
// extended by constant plateaus on the two end cells, so that total weight
// is exactly one and bounded smooth integrands keep O(h^2) accuracy.
std::vector<double> interior_quadrature_weights(std::int64_t grid_size);

// Covariance matrix of the parameter CLT, assembled from the parameter
// gradients of the composed warps at the true parameters. `pinned` drops the
// reference block row/column, which is what makes it invertible for families
// with a group structure.
SymMatrix sigma_matrix(const DeformationFamily& fam, const ParameterVector& theta_star,
                       const Distribution& err, std::int64_t grid_size, bool pinned);

// Draws from the limiting law of n * A_n under the deformation model. The
// spectral data of the pinned covariance matrix is precomputed once.
class GofLimitSampler {
 public:
  GofLimitSampler(std::shared_ptr<const DeformationFamily> fam, ParameterVector theta_star,
                  Distribution err, std::int64_t grid_size, bool centered = false);

  struct Draw {
    double quadratic_term = 0.0;  // (1/J) sum_j integral (Btilde_j / g o G^-1)^2
    double correction = 0.0;      // (1/2) Y' Sigma^-1 Y
    double value() const { return quadratic_term - correction; }
  };

  Draw draw_detail(RandomStream& stream) const;
  double draw(RandomStream& stream) const { return draw_detail(stream).value(); }

  int blocks() const { return static_cast<int>(theta_star_.blocks()); }
  bool centered() const { return centered_; }

 private:
  std::shared_ptr<const DeformationFamily> fam_;
  ParameterVector theta_star_;
  Distribution err_;
  std::int64_t grid_size_;
  bool centered_;
  std::vector<double> weights_;
  std::vector<double> inv_g_;                     // 1 / g(G^-1(t_k))
  std::vector<std::vector<double>> dpsi_;         // free blocks x (p * N), gradient rows
  std::vector<int> free_blocks_;
  EigenSym sigma_eig_;
};

double sample_gof_limit(std::shared_ptr<const DeformationFamily> fam,
                        const ParameterVector& theta_star, const Distribution& err,
                        std::int64_t grid_size, RandomStream& stream, bool centered = false);

// c_n = integral over [1/n, 1-1/n] of t(1-t)/g^2(G^-1(t)).
double centering_constant(const Distribution& err, std::int64_t n, std::int64_t grid_size);

// Variance of the Gaussian limit of the centered alignment-cost process for a
// tuple of smooth models warped by per-sample parameters of one family.
double nonpar_clt_variance(std::span<const Distribution> models, const DeformationFamily& fam,
                           std::span<const std::vector<double>> lambdas,
                           std::int64_t grid_size);

}  // namespace warpfit
