#include "warpfit/limitlaw.hpp"

#include <algorithm>
#include <cmath>

namespace warpfit {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw error(errc::quadrature_divergence, std::string(what) + " is not finite on the grid");
}

}  // namespace

BridgePath sample_bridge(std::int64_t grid_size, RandomStream& stream) {
  if (grid_size < 1) throw error(errc::bad_argument, "bridge grid size must be positive");
  const auto N = static_cast<std::size_t>(grid_size);
  const double h = 1.0 / static_cast<double>(N + 1);
  const double root_h = std::sqrt(h);
  const Distribution gauss = Distribution::normal(0.0, 1.0);

  BridgePath path;
  path.values.resize(N);
  double walk = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    walk += root_h * gauss.sample(stream);
    path.values[k] = walk;
  }
  double final = walk + root_h * gauss.sample(stream);  // W(1)
  for (std::size_t k = 0; k < N; ++k)
    path.values[k] -= (static_cast<double>(k + 1) * h) * final;
  return path;
}

std::vector<double> interior_quadrature_weights(std::int64_t grid_size) {
  const auto N = static_cast<std::size_t>(grid_size);
  const double h = 1.0 / static_cast<double>(N + 1);
  std::vector<double> w(N, h);
  if (N == 1) {
    w[0] = 1.0;
    return w;
  }
  w[0] = 1.5 * h;
  w[N - 1] = 1.5 * h;
  return w;
}

SymMatrix sigma_matrix(const DeformationFamily& fam, const ParameterVector& theta_star,
                       const Distribution& err, std::int64_t grid_size, bool pinned) {
  if (grid_size < 16) throw error(errc::bad_argument, "sigma quadrature needs grid size >= 16");
  theta_star.validate(fam);
  const int J = theta_star.blocks();
  const int p = fam.param_dim();

  std::vector<int> blocks;
  for (int j = 0; j < J; ++j)
    if (!pinned || j != theta_star.ref_index) blocks.push_back(j);
  const int nb = static_cast<int>(blocks.size());

  const auto N = static_cast<std::size_t>(grid_size);
  std::vector<double> w = interior_quadrature_weights(grid_size);

  // dpsi[b][k*p + u] = D_u psi_{blocks[b]}(theta*, G^-1(t_k))
  std::vector<std::vector<double>> dpsi(nb, std::vector<double>(N * static_cast<std::size_t>(p)));
  for (std::size_t k = 0; k < N; ++k) {
    double t = static_cast<double>(k + 1) / static_cast<double>(N + 1);
    double x = err.quantile(t);
    for (int b = 0; b < nb; ++b) {
      auto g = psi_dparam(fam, theta_star.thetas[blocks[b]], theta_star.thetas[blocks[b]], x);
      for (int u = 0; u < p; ++u) {
        require_finite(g[u], "psi parameter gradient");
        dpsi[b][k * static_cast<std::size_t>(p) + u] = g[u];
      }
    }
  }

  SymMatrix sigma(nb * p);
  const double Jd = static_cast<double>(J);
  for (int bi = 0; bi < nb; ++bi) {
    for (int bj = bi; bj < nb; ++bj) {
      double scale = (blocks[bi] == blocks[bj]) ? 2.0 * (Jd - 1.0) / (Jd * Jd)
                                                : -2.0 / (Jd * Jd);
      for (int u = 0; u < p; ++u) {
        for (int v = 0; v < p; ++v) {
          double acc = 0.0;
          for (std::size_t k = 0; k < N; ++k)
            acc += w[k] * dpsi[bi][k * static_cast<std::size_t>(p) + u] *
                   dpsi[bj][k * static_cast<std::size_t>(p) + v];
          double entry = scale * acc;
          sigma.at(bi * p + u, bj * p + v) = entry;
          sigma.at(bj * p + v, bi * p + u) = entry;
        }
      }
    }
  }
  return sigma;
}

GofLimitSampler::GofLimitSampler(std::shared_ptr<const DeformationFamily> fam,
                                 ParameterVector theta_star, Distribution err,
                                 std::int64_t grid_size, bool centered)
    : fam_(std::move(fam)), theta_star_(std::move(theta_star)), err_(err),
      grid_size_(grid_size), centered_(centered) {
  if (grid_size_ < 16) throw error(errc::bad_argument, "limit sampler needs grid size >= 16");
  theta_star_.validate(*fam_);
  if (!centered_ && !err_.integrable_quantile_tail())
    throw error(errc::quadrature_divergence,
                "quantile tails of " + err_.name() +
                    " are not integrable; use the centered variant");

  const int J = theta_star_.blocks();
  const int p = fam_->param_dim();
  const auto N = static_cast<std::size_t>(grid_size_);
  weights_ = interior_quadrature_weights(grid_size_);
  inv_g_.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    double t = static_cast<double>(k + 1) / static_cast<double>(N + 1);
    double g = err_.density(err_.quantile(t));
    if (!(g > 0.0) || !std::isfinite(g))
      throw error(errc::quadrature_divergence, "error density must be positive on the grid");
    inv_g_[k] = 1.0 / g;
  }

  for (int j = 0; j < J; ++j)
    if (j != theta_star_.ref_index) free_blocks_.push_back(j);
  dpsi_.assign(free_blocks_.size(), std::vector<double>(N * static_cast<std::size_t>(p)));
  for (std::size_t k = 0; k < N; ++k) {
    double t = static_cast<double>(k + 1) / static_cast<double>(N + 1);
    double x = err_.quantile(t);
    for (std::size_t b = 0; b < free_blocks_.size(); ++b) {
      auto g = psi_dparam(*fam_, theta_star_.thetas[free_blocks_[b]],
                          theta_star_.thetas[free_blocks_[b]], x);
      for (int u = 0; u < p; ++u) {
        require_finite(g[u], "psi parameter gradient");
        dpsi_[b][k * static_cast<std::size_t>(p) + u] = g[u];
      }
    }
  }

  SymMatrix sigma = sigma_matrix(*fam_, theta_star_, err_, grid_size_, /*pinned=*/true);
  sigma_eig_ = eigen_sym(sigma);
  double lo = sigma_eig_.values.front();
  double hi = sigma_eig_.values.back();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw error(errc::singular_sigma, "pinned covariance matrix is numerically singular");
}

GofLimitSampler::Draw GofLimitSampler::draw_detail(RandomStream& stream) const {
  const int J = theta_star_.blocks();
  const int p = fam_->param_dim();
  const auto N = static_cast<std::size_t>(grid_size_);
  const double Jd = static_cast<double>(J);

  // Children derive from the key alone, so key each draw off a fresh value.
  RandomStream base(stream.next_u64());
  std::vector<BridgePath> bridges;
  bridges.reserve(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    RandomStream sub = base.child(static_cast<std::uint64_t>(j));
    bridges.push_back(sample_bridge(grid_size_, sub));
  }

  // Btilde_j = B_j - mean_j B_j, applied in place.
  for (std::size_t k = 0; k < N; ++k) {
    double mean = 0.0;
    for (int j = 0; j < J; ++j) mean += bridges[j].values[k];
    mean /= Jd;
    for (int j = 0; j < J; ++j) bridges[j].values[k] -= mean;
  }

  Draw out;
  double quad = 0.0;
  for (int j = 0; j < J; ++j) {
    for (std::size_t k = 0; k < N; ++k) {
      double b = bridges[j].values[k] * inv_g_[k];
      double integrand = b * b;
      if (centered_) {
        double t = static_cast<double>(k + 1) / static_cast<double>(N + 1);
        integrand -= (Jd - 1.0) / Jd * t * (1.0 - t) * inv_g_[k] * inv_g_[k];
      }
      quad += weights_[k] * integrand;
    }
  }
  out.quadratic_term = quad / Jd;

  const std::size_t dim = free_blocks_.size() * static_cast<std::size_t>(p);
  std::vector<double> y(dim, 0.0);
  for (std::size_t b = 0; b < free_blocks_.size(); ++b) {
    const auto& bridge = bridges[static_cast<std::size_t>(free_blocks_[b])].values;
    for (std::size_t k = 0; k < N; ++k) {
      double common = weights_[k] * bridge[k] * inv_g_[k];
      for (int u = 0; u < p; ++u)
        y[b * static_cast<std::size_t>(p) + u] +=
            common * dpsi_[b][k * static_cast<std::size_t>(p) + u];
    }
  }
  for (auto& v : y) v *= 2.0 / Jd;

  double quadform = 0.0;
  for (std::size_t e = 0; e < dim; ++e) {
    double proj = 0.0;
    for (std::size_t k = 0; k < dim; ++k)
      proj += sigma_eig_.vectors.at(static_cast<int>(k), static_cast<int>(e)) * y[k];
    quadform += proj * proj / sigma_eig_.values[e];
  }
  out.correction = 0.5 * quadform;
  return out;
}

double sample_gof_limit(std::shared_ptr<const DeformationFamily> fam,
                        const ParameterVector& theta_star, const Distribution& err,
                        std::int64_t grid_size, RandomStream& stream, bool centered) {
  GofLimitSampler sampler(std::move(fam), theta_star, err, grid_size, centered);
  return sampler.draw(stream);
}

double centering_constant(const Distribution& err, std::int64_t n, std::int64_t grid_size) {
  if (n < 2) throw error(errc::bad_argument, "centering constant needs n >= 2");
  if (grid_size < 2) throw error(errc::bad_argument, "centering quadrature needs grid size >= 2");
  const double a = 1.0 / static_cast<double>(n);
  const double b = 1.0 - a;
  if (b <= a) return 0.0;
  const auto N = static_cast<std::size_t>(grid_size);
  const double h = (b - a) / static_cast<double>(N - 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    double t = a + h * static_cast<double>(k);
    double g = err.density(err.quantile(t));
    double f = t * (1.0 - t) / (g * g);
    require_finite(f, "centering integrand");
    acc += (k == 0 || k + 1 == N) ? 0.5 * f : f;
  }
  return acc * h;
}

double nonpar_clt_variance(std::span<const Distribution> models, const DeformationFamily& fam,
                           std::span<const std::vector<double>> lambdas,
                           std::int64_t grid_size) {
  if (models.size() < 2) throw error(errc::empty_collection, "variance needs at least two models");
  if (models.size() != lambdas.size())
    throw error(errc::bad_argument, "one warp parameter block per model required");
  if (grid_size < 16) throw error(errc::bad_argument, "variance quadrature needs grid size >= 16");
  const std::size_t J = models.size();
  const auto N = static_cast<std::size_t>(grid_size);
  std::vector<double> w = interior_quadrature_weights(grid_size);

  // warped[j][k] = phi_j(F_j^-1(t_k)), h[j][k] the CLT integrand factor.
  std::vector<std::vector<double>> warped(J, std::vector<double>(N));
  std::vector<std::vector<double>> hfun(J, std::vector<double>(N));
  for (std::size_t k = 0; k < N; ++k) {
    double t = static_cast<double>(k + 1) / static_cast<double>(N + 1);
    double bary = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      double x = models[j].quantile(t);
      warped[j][k] = fam.apply(lambdas[j], x);
      bary += warped[j][k];
    }
    bary /= static_cast<double>(J);
    for (std::size_t j = 0; j < J; ++j) {
      double x = models[j].quantile(t);
      double density = models[j].density(x);
      if (!(density > 0.0))
        throw error(errc::quadrature_divergence, "model density must be positive on the grid");
      double value = fam.dx(lambdas[j], x) * (warped[j][k] - bary) / density;
      require_finite(value, "CLT integrand");
      hfun[j][k] = value;
    }
  }

  double total = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const auto& h = hfun[j];
    // integral integral (min(s,t) - st) h(s) h(t) = integral Hbar(u)^2 du - (integral t h)^2
    // with Hbar(u) the upper tail integral of h.
    std::vector<double> tail(N);
    double acc = 0.0;
    for (std::size_t k = N; k-- > 0;) {
      tail[k] = acc + 0.5 * w[k] * h[k];
      acc += w[k] * h[k];
    }
    double q_min = 0.0, moment = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      double t = static_cast<double>(k + 1) / static_cast<double>(N + 1);
      q_min += w[k] * tail[k] * tail[k];
      moment += w[k] * t * h[k];
    }
    total += q_min - moment * moment;
  }
  return 4.0 * total / (static_cast<double>(J) * static_cast<double>(J));
}

}  // namespace warpfit
