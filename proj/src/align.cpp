#include "warpfit/align.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace warpfit {

namespace {

// Shared state for repeated U_n evaluations over one dataset: the merged
// grid, the pre-warped reference levels, and per-sample warp buffers.
class AlignmentObjective {
 public:
  AlignmentObjective(std::span<const EmpiricalDistribution> ds, const DeformationFamily& fam,
                     int ref_index, std::span<const double> ref_value)
      : ds_(ds), fam_(fam), ref_index_(ref_index), p_(fam.param_dim()) {
    const auto J = static_cast<int>(ds.size());
    std::vector<std::int64_t> sizes(J);
    for (int j = 0; j < J; ++j) sizes[j] = ds[j].n();
    grid_ = MergedGrid::build(sizes);
    warped_.resize(J);
    level_ptrs_.resize(J);
    for (int j = 0; j < J; ++j) {
      warped_[j].resize(static_cast<std::size_t>(ds[j].n()));
      level_ptrs_[j] = warped_[j].data();
    }
    fam.apply_many(ref_value, ds[ref_index].values(), warped_[ref_index]);
    for (int j = 0; j < J; ++j)
      if (j != ref_index) free_.push_back(j);
  }

  int free_dim() const { return static_cast<int>(free_.size()) * p_; }
  const std::vector<int>& free_samples() const { return free_; }
  int param_dim() const { return p_; }

  // `flat` holds the free blocks in ascending sample order; must lie in the box.
  double operator()(std::span<const double> flat) const {
    for (std::size_t k = 0; k < free_.size(); ++k) {
      int j = free_[k];
      fam_.apply_many(flat.subspan(k * p_, p_), ds_[j].values(), warped_[j]);
    }
    return grid_.mean_squared_spread(level_ptrs_);
  }

 private:
  std::span<const EmpiricalDistribution> ds_;
  const DeformationFamily& fam_;
  int ref_index_;
  int p_;
  MergedGrid grid_;
  std::vector<int> free_;
  mutable std::vector<std::vector<double>> warped_;
  mutable std::vector<double*> level_ptrs_;
};

struct RestartOutcome {
  std::vector<double> x;
  double cost = std::numeric_limits<double>::infinity();
  std::int64_t evals = 0;
  bool converged = false;
};

// Nelder-Mead with every candidate projected onto the box. Tracks the best
// point over all evaluations, probes included.
RestartOutcome nelder_mead(const AlignmentObjective& f, const ParamBox& box,
                           std::vector<double> x0, double fn_tol, double x_tol,
                           std::int64_t max_evals) {
  const int d = static_cast<int>(x0.size());
  const int p = static_cast<int>(box.dim());
  RestartOutcome out;

  auto project = [&](std::vector<double>& x) {
    for (int k = 0; k < d; ++k)
      x[k] = std::clamp(x[k], box.lo[k % p], box.hi[k % p]);
  };
  auto eval = [&](const std::vector<double>& x) {
    double v = f(x);
    ++out.evals;
    if (v < out.cost) {
      out.cost = v;
      out.x = x;
    }
    return v;
  };

  project(x0);
  std::vector<std::vector<double>> simplex(d + 1, x0);
  std::vector<double> fx(d + 1);
  for (int k = 0; k < d; ++k) {
    double step = 0.05 * (box.hi[k % p] - box.lo[k % p]);
    auto& v = simplex[k + 1];
    v[k] += step;
    if (v[k] > box.hi[k % p]) v[k] = x0[k] - step;
    project(v);
  }
  for (int k = 0; k <= d; ++k) fx[k] = eval(simplex[k]);

  std::vector<int> order(d + 1);
  std::vector<double> centroid(d), cand(d), cand2(d);
  while (out.evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    int best = order[0], worst = order[d], second = order[d - 1];

    double spread = fx[worst] - fx[best];
    double diam = 0.0;
    for (int k = 1; k <= d; ++k)
      for (int m = 0; m < d; ++m)
        diam = std::max(diam, std::abs(simplex[order[k]][m] - simplex[best][m]));
    if (spread <= fn_tol || diam <= x_tol) {
      out.converged = true;
      return out;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int k = 0; k <= d; ++k) {
      if (k == worst) continue;
      for (int m = 0; m < d; ++m) centroid[m] += simplex[k][m];
    }
    for (int m = 0; m < d; ++m) centroid[m] /= d;

    for (int m = 0; m < d; ++m) cand[m] = centroid[m] + (centroid[m] - simplex[worst][m]);
    project(cand);
    double fr = eval(cand);
    if (fr < fx[best]) {
      for (int m = 0; m < d; ++m) cand2[m] = centroid[m] + 2.0 * (cand[m] - centroid[m]);
      project(cand2);
      double fe = eval(cand2);
      if (fe < fr) {
        simplex[worst] = cand2;
        fx[worst] = fe;
      } else {
        simplex[worst] = cand;
        fx[worst] = fr;
      }
    } else if (fr < fx[second]) {
      simplex[worst] = cand;
      fx[worst] = fr;
    } else {
      bool outside = fr < fx[worst];
      const std::vector<double>& toward = outside ? cand : simplex[worst];
      for (int m = 0; m < d; ++m) cand2[m] = centroid[m] + 0.5 * (toward[m] - centroid[m]);
      project(cand2);
      double fc = eval(cand2);
      if (fc < (outside ? fr : fx[worst])) {
        simplex[worst] = cand2;
        fx[worst] = fc;
      } else {
        for (int k = 0; k <= d; ++k) {
          if (k == best) continue;
          for (int m = 0; m < d; ++m)
            simplex[k][m] = simplex[best][m] + 0.5 * (simplex[k][m] - simplex[best][m]);
          project(simplex[k]);
          fx[k] = eval(simplex[k]);
          if (out.evals >= max_evals) return out;
        }
      }
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Moment-matched start for the stock families; identity otherwise.
std::vector<double> warm_start(std::span<const EmpiricalDistribution> ds,
                               const DeformationFamily& fam, int ref_index,
                               std::span<const double> ref_value,
                               const std::vector<int>& free_samples) {
  const int p = fam.param_dim();
  std::vector<double> start(free_samples.size() * static_cast<std::size_t>(p));
  std::vector<double> ref_warped(ds[ref_index].values().size());
  fam.apply_many(ref_value, ds[ref_index].values(), ref_warped);
  const double ref_mean = mean_of(ref_warped);
  const double ref_sd = sd_of(ref_warped);

  const std::string id = fam.id();
  for (std::size_t k = 0; k < free_samples.size(); ++k) {
    const auto& v = ds[free_samples[k]].values();
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double sd = 0.0;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(v.size()));

    std::vector<double> block = fam.identity_params();
    if (id == "location-scale" && ref_sd > 0.0 && sd > 0.0) {
      block[1] = sd / ref_sd;
      block[0] = mean - ref_mean * block[1];
    } else if (id == "scale" && sd > 0.0 && std::abs(ref_sd) > 0.0) {
      block[0] = ref_sd / sd;
    } else if (id == "location") {
      block[0] = mean - ref_mean;
    }
    fam.param_box().clamp(block);
    std::copy(block.begin(), block.end(), start.begin() + static_cast<std::ptrdiff_t>(k * p));
  }
  return start;
}

}  // namespace

double alignment_cost(std::span<const EmpiricalDistribution> ds, const DeformationFamily& fam,
                      const ParameterVector& theta) {
  if (ds.size() < 2) throw error(errc::empty_collection, "alignment needs at least two samples");
  if (theta.blocks() != static_cast<int>(ds.size()))
    throw error(errc::bad_argument, "parameter vector has wrong number of blocks");
  theta.validate(fam);
  AlignmentObjective obj(ds, fam, theta.ref_index, theta.ref_value);
  std::vector<double> flat;
  flat.reserve(obj.free_dim());
  for (int j : obj.free_samples())
    flat.insert(flat.end(), theta.thetas[j].begin(), theta.thetas[j].end());
  return obj(flat);
}

AlignmentResult minimize_alignment(std::span<const EmpiricalDistribution> ds,
                                   const DeformationFamily& fam, int ref_index,
                                   const OptimizerConfig& config,
                                   std::optional<std::vector<double>> ref_value) {
  const int J = static_cast<int>(ds.size());
  if (J < 2) throw error(errc::empty_collection, "alignment needs at least two samples");
  if (ref_index < 0 || ref_index >= J)
    throw error(errc::bad_argument, "reference index must lie in [0, J)");
  const int p = fam.param_dim();
  std::vector<double> pinned = ref_value ? std::move(*ref_value) : fam.identity_params();
  fam.require_in_box(pinned);

  AlignmentObjective obj(ds, fam, ref_index, pinned);
  const int d = obj.free_dim();
  const ParamBox& box = fam.param_box();
  const int restarts = std::max(1, config.restarts);
  const std::int64_t budget =
      config.max_evals > 0 ? config.max_evals
                           : 2000LL * p * std::max(1, J - 1);

  // Start points: moment-matched first, then a Latin hypercube over the box.
  std::vector<std::vector<double>> starts(restarts);
  starts[0] = warm_start(ds, fam, ref_index, pinned, obj.free_samples());
  if (restarts > 1) {
    RandomStream design = RandomStream(config.seed).child(0x4C4853);
    const int extra = restarts - 1;
    std::vector<std::vector<int>> strata(d, std::vector<int>(extra));
    for (int k = 0; k < d; ++k) {
      auto& perm = strata[k];
      std::iota(perm.begin(), perm.end(), 0);
      for (int s = extra - 1; s > 0; --s)
        std::swap(perm[s], perm[design.next_below(static_cast<std::uint64_t>(s) + 1)]);
    }
    for (int s = 0; s < extra; ++s) {
      auto& x = starts[s + 1];
      x.resize(d);
      for (int k = 0; k < d; ++k) {
        double u = (strata[k][s] + design.next_uniform()) / extra;
        x[k] = box.lo[k % p] + u * (box.hi[k % p] - box.lo[k % p]);
      }
    }
  }

  std::vector<RestartOutcome> outcomes(restarts);
  parallel_for(restarts, config.threads, [&](std::int64_t r) {
    outcomes[r] = nelder_mead(obj, box, starts[r], config.fn_tol, config.x_tol, budget);
  });

  std::vector<double> identity_flat(d);
  for (int k = 0; k < d; ++k) identity_flat[k] = fam.identity_params()[k % p];
  auto dist_to_identity = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += (x[k] - identity_flat[k]) * (x[k] - identity_flat[k]);
    return s;
  };

  int winner = 0;
  double winner_dist = dist_to_identity(outcomes[0].x);
  for (int r = 1; r < restarts; ++r) {
    double dist = dist_to_identity(outcomes[r].x);
    if (outcomes[r].cost < outcomes[winner].cost ||
        (outcomes[r].cost == outcomes[winner].cost && dist < winner_dist)) {
      winner = r;
      winner_dist = dist;
    }
  }

  AlignmentResult result;
  result.theta_hat.thetas.assign(J, pinned);
  result.theta_hat.ref_index = ref_index;
  result.theta_hat.ref_value = pinned;
  const auto& free_samples = obj.free_samples();
  for (std::size_t k = 0; k < free_samples.size(); ++k) {
    auto& block = result.theta_hat.thetas[free_samples[k]];
    block.assign(outcomes[winner].x.begin() + static_cast<std::ptrdiff_t>(k * p),
                 outcomes[winner].x.begin() + static_cast<std::ptrdiff_t>((k + 1) * p));
  }
  result.cost = outcomes[winner].cost;
  result.converged = outcomes[winner].converged;
  result.restarts_used = restarts;
  for (const auto& o : outcomes) result.evaluations += o.evals;
  return result;
}

double scale_closed_form(const EmpiricalDistribution& d1, const EmpiricalDistribution& d2) {
  double num = 0.0, den = 0.0;
  if (d1.n() == d2.n()) {
    for (std::int64_t i = 0; i < d1.n(); ++i) {
      num += d1.values()[i] * d2.values()[i];
      den += d2.values()[i] * d2.values()[i];
    }
    num /= static_cast<double>(d1.n());
    den /= static_cast<double>(d1.n());
  } else {
    const std::int64_t sizes[2] = {d1.n(), d2.n()};
    MergedGrid grid = MergedGrid::build(sizes);
    for (std::size_t c = 0; c < grid.cells(); ++c) {
      double q1 = d1.values()[grid.index[0][c]];
      double q2 = d2.values()[grid.index[1][c]];
      num += grid.width[c] * q1 * q2;
      den += grid.width[c] * q2 * q2;
    }
  }
  if (den <= 0.0)
    throw error(errc::degenerate_denominator, "second sample is identically zero");
  return num / den;
}

}  // namespace warpfit
