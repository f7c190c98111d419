#include "warpfit/warpfit.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "warpfit/align.hpp"
#include "warpfit/boot.hpp"
#include "warpfit/harness.hpp"
#include "warpfit/limitlaw.hpp"

using namespace warpfit;

struct wf_family {
  std::shared_ptr<const DeformationFamily> impl;
};

namespace {

thread_local std::string g_last_error;

wf_status status_of(errc code) {
  switch (code) {
    case errc::ok: return WF_OK;
    case errc::empty_sample: return WF_EMPTY_SAMPLE;
    case errc::non_finite_value: return WF_NON_FINITE_VALUE;
    case errc::out_of_range: return WF_OUT_OF_RANGE;
    case errc::invalid_order: return WF_INVALID_ORDER;
    case errc::empty_collection: return WF_EMPTY_COLLECTION;
    case errc::instance_too_large: return WF_INSTANCE_TOO_LARGE;
    case errc::param_out_of_box: return WF_PARAM_OUT_OF_BOX;
    case errc::degenerate_denominator: return WF_DEGENERATE_DENOMINATOR;
    case errc::no_convergence: return WF_NO_CONVERGENCE;
    case errc::singular_sigma: return WF_SINGULAR_SIGMA;
    case errc::quadrature_divergence: return WF_QUADRATURE_DIVERGENCE;
    case errc::invalid_spec: return WF_INVALID_SPEC;
    case errc::empty_stats: return WF_EMPTY_STATS;
    case errc::bad_argument: return WF_BAD_ARGUMENT;
  }
  return WF_INTERNAL_ERROR;
}

template <typename Fn>
wf_status guarded(Fn&& fn) {
  try {
    fn();
    return WF_OK;
  } catch (const error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WF_INTERNAL_ERROR;
  }
}

std::vector<EmpiricalDistribution> make_samples(const double* values, const int64_t* sizes,
                                                int J) {
  if (!values || !sizes || J < 1)
    throw error(errc::bad_argument, "null data pointers or nonpositive J");
  std::vector<EmpiricalDistribution> ds;
  ds.reserve(static_cast<std::size_t>(J));
  const double* cursor = values;
  for (int j = 0; j < J; ++j) {
    if (sizes[j] < 1) throw error(errc::empty_sample, "sample sizes must be positive");
    ds.push_back(EmpiricalDistribution::from_samples(
        std::span<const double>(cursor, static_cast<std::size_t>(sizes[j]))));
    cursor += sizes[j];
  }
  return ds;
}

OptimizerConfig to_cpp(const wf_opt_config* c) {
  OptimizerConfig out;
  if (!c) return out;
  out.restarts = c->restarts;
  out.fn_tol = c->fn_tol;
  out.x_tol = c->x_tol;
  out.max_evals = c->max_evals;
  out.seed = c->seed;
  out.threads = c->threads;
  return out;
}

BootstrapConfig to_cpp(const wf_boot_config* c) {
  BootstrapConfig out;
  if (!c) return out;
  out.B = c->B;
  if (c->m_exponent > 0.0) out.m_exponent = c->m_exponent;
  out.m_explicit = c->m_explicit;
  out.seed = c->seed;
  out.alpha = c->alpha;
  out.threads = c->threads;
  if (c->resampling == 0) out.resampling = Resampling::per_sample;
  else if (c->resampling == 1) out.resampling = Resampling::from_first;
  out.opt = to_cpp(&c->opt);
  return out;
}

wf_test_report to_c(const TestReport& r) {
  wf_test_report out{};
  out.statistic = r.statistic;
  out.critical_value = r.critical_value;
  out.p_value = r.p_value;
  out.reject = r.reject ? 1 : 0;
  out.n = r.n;
  out.m_n = r.m_n;
  out.B = r.B;
  out.seed = r.seed;
  out.kind = r.kind == TestReport::Kind::gof ? 0 : 1;
  out.alpha = r.alpha;
  out.nonconverged = r.nonconverged;
  return out;
}

}  // namespace

extern "C" {

const char* wf_status_name(wf_status status) {
  switch (status) {
    case WF_OK: return "ok";
    case WF_EMPTY_SAMPLE: return "EmptySample";
    case WF_NON_FINITE_VALUE: return "NonFiniteValue";
    case WF_OUT_OF_RANGE: return "OutOfRange";
    case WF_INVALID_ORDER: return "InvalidOrder";
    case WF_EMPTY_COLLECTION: return "EmptyCollection";
    case WF_INSTANCE_TOO_LARGE: return "InstanceTooLarge";
    case WF_PARAM_OUT_OF_BOX: return "ParamOutOfBox";
    case WF_DEGENERATE_DENOMINATOR: return "DegenerateDenominator";
    case WF_NO_CONVERGENCE: return "NoConvergence";
    case WF_SINGULAR_SIGMA: return "SingularSigma";
    case WF_QUADRATURE_DIVERGENCE: return "QuadratureDivergence";
    case WF_INVALID_SPEC: return "InvalidSpec";
    case WF_EMPTY_STATS: return "EmptyStats";
    case WF_BAD_ARGUMENT: return "BadArgument";
    case WF_INTERNAL_ERROR: return "InternalError";
  }
  return "UnknownStatus";
}

const char* wf_last_error(void) { return g_last_error.c_str(); }

wf_family* wf_family_create(const char* id) {
  wf_family* out = nullptr;
  wf_status s = guarded([&] {
    if (!id) throw error(errc::bad_argument, "family id is null");
    out = new wf_family{family_by_id(id)};
  });
  return s == WF_OK ? out : nullptr;
}

wf_family* wf_family_create_boxed(const char* id, const double* lo, const double* hi, int p) {
  wf_family* out = nullptr;
  wf_status s = guarded([&] {
    if (!id || !lo || !hi || p < 1) throw error(errc::bad_argument, "bad family box arguments");
    ParamBox box{std::vector<double>(lo, lo + p), std::vector<double>(hi, hi + p)};
    std::string name(id);
    std::shared_ptr<const DeformationFamily> fam;
    if (name == "location-scale") fam = location_scale_family(std::move(box));
    else if (name == "scale") fam = scale_family(std::move(box));
    else if (name == "location") fam = location_family(std::move(box));
    else throw error(errc::invalid_spec, "unknown boxed family '" + name + "'");
    out = new wf_family{std::move(fam)};
  });
  return s == WF_OK ? out : nullptr;
}

void wf_family_free(wf_family* family) { delete family; }

int wf_family_param_dim(const wf_family* family) {
  return family ? family->impl->param_dim() : 0;
}

wf_status wf_family_identity(const wf_family* family, double* out) {
  return guarded([&] {
    if (!family || !out) throw error(errc::bad_argument, "null family or output");
    auto id = family->impl->identity_params();
    std::copy(id.begin(), id.end(), out);
  });
}

wf_status wf_wasserstein(const double* a, int64_t na, const double* b, int64_t nb, double r,
                         double* out) {
  return guarded([&] {
    if (!a || !b || !out) throw error(errc::bad_argument, "null arguments");
    auto da = EmpiricalDistribution::from_samples({a, static_cast<std::size_t>(na)});
    auto db = EmpiricalDistribution::from_samples({b, static_cast<std::size_t>(nb)});
    *out = wasserstein_r(da, db, r);
  });
}

wf_status wf_variation(const double* values, const int64_t* sizes, int J, double r,
                       double* out_variation, double* out_per_sample) {
  return guarded([&] {
    if (!out_variation) throw error(errc::bad_argument, "null output");
    auto ds = make_samples(values, sizes, J);
    *out_variation = variation_r(ds, r);
    if (out_per_sample) {
      std::vector<QuantileFunction> qs;
      qs.reserve(ds.size());
      for (const auto& d : ds) qs.push_back(QuantileFunction::of(d));
      QuantileFunction center = variation_minimizer(qs, r);
      for (int j = 0; j < J; ++j) out_per_sample[j] = wasserstein_r(qs[j], center, r);
    }
  });
}

wf_status wf_variation_oracle(const double* values, const int64_t* sizes, int J, double r,
                              double* out) {
  return guarded([&] {
    if (!out) throw error(errc::bad_argument, "null output");
    auto ds = make_samples(values, sizes, J);
    *out = multimarginal_variation_oracle(ds, r);
  });
}

wf_status wf_scale_closed_form(const double* a, int64_t na, const double* b, int64_t nb,
                               double* out) {
  return guarded([&] {
    if (!a || !b || !out) throw error(errc::bad_argument, "null arguments");
    auto da = EmpiricalDistribution::from_samples({a, static_cast<std::size_t>(na)});
    auto db = EmpiricalDistribution::from_samples({b, static_cast<std::size_t>(nb)});
    *out = scale_closed_form(da, db);
  });
}

wf_opt_config wf_opt_config_default(void) {
  OptimizerConfig d;
  return {d.restarts, d.fn_tol, d.x_tol, d.max_evals, d.seed, d.threads};
}

wf_boot_config wf_boot_config_default(void) {
  wf_boot_config c{};
  c.B = 500;
  c.m_exponent = 0.0;
  c.m_explicit = 0;
  c.seed = 0;
  c.alpha = 0.05;
  c.threads = 1;
  c.resampling = -1;
  c.opt = wf_opt_config_default();
  return c;
}

wf_status wf_align(const double* values, const int64_t* sizes, int J, const wf_family* family,
                   int ref_index, const double* ref_value, const wf_opt_config* config,
                   double* theta_out, wf_align_result* out) {
  return guarded([&] {
    if (!family || !theta_out || !out) throw error(errc::bad_argument, "null arguments");
    auto ds = make_samples(values, sizes, J);
    const int p = family->impl->param_dim();
    std::optional<std::vector<double>> pinned;
    if (ref_value) pinned = std::vector<double>(ref_value, ref_value + p);
    AlignmentResult res =
        minimize_alignment(ds, *family->impl, ref_index, to_cpp(config), std::move(pinned));
    for (int j = 0; j < J; ++j)
      std::copy(res.theta_hat.thetas[j].begin(), res.theta_hat.thetas[j].end(),
                theta_out + static_cast<std::ptrdiff_t>(j) * p);
    out->cost = res.cost;
    out->evaluations = res.evaluations;
    out->converged = res.converged ? 1 : 0;
    out->restarts_used = res.restarts_used;
  });
}

wf_status wf_gof_test(const double* values, const int64_t* sizes, int J,
                      const wf_family* family, int ref_index, const wf_boot_config* config,
                      wf_test_report* out) {
  return guarded([&] {
    if (!family || !out) throw error(errc::bad_argument, "null arguments");
    auto ds = make_samples(values, sizes, J);
    *out = to_c(gof_test(ds, *family->impl, ref_index, to_cpp(config)));
  });
}

wf_status wf_threshold_test(const double* values, const int64_t* sizes, int J,
                            const wf_family* family, int ref_index, double delta0,
                            const wf_boot_config* config, wf_test_report* out) {
  return guarded([&] {
    if (!family || !out) throw error(errc::bad_argument, "null arguments");
    auto ds = make_samples(values, sizes, J);
    *out = to_c(threshold_test(ds, *family->impl, ref_index, delta0, to_cpp(config)));
  });
}

wf_status wf_simulate(const int* grid_J, const int64_t* grid_n, const double* grid_beta,
                      int rows, const char* gamma, int64_t K, int64_t B, double alpha,
                      uint64_t seed, int threads, double* out_freq,
                      const char* out_csv_path) {
  return guarded([&] {
    if (!grid_J || !grid_n || !grid_beta || rows < 1 || !out_freq)
      throw error(errc::bad_argument, "bad simulation grid");
    std::vector<ExperimentGridPoint> grid(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) grid[static_cast<std::size_t>(r)] = {grid_J[r], grid_n[r],
                                                                        grid_beta[r]};
    ExperimentTable table =
        gamma ? run_power_experiment(grid, Distribution::parse(gamma), K, B, alpha, seed,
                                     threads)
              : run_level_experiment(grid, K, B, alpha, seed, threads);
    for (int r = 0; r < rows; ++r) out_freq[r] = table.cells[static_cast<std::size_t>(r)].freq;
    if (out_csv_path) {
      std::ofstream file(out_csv_path, std::ios::binary);
      if (!file) throw error(errc::bad_argument, std::string("cannot open ") + out_csv_path);
      file << table.to_csv();
    }
  });
}

wf_status wf_limit_sample(const wf_family* family, const double* theta_star, int J,
                          int ref_index, const char* err_id, int centered, int64_t grid_size,
                          int64_t count, uint64_t seed, double* out_draws) {
  return guarded([&] {
    if (!family || !err_id || !out_draws || count < 1)
      throw error(errc::bad_argument, "null arguments");
    const int p = family->impl->param_dim();
    ParameterVector theta = ParameterVector::pinned_identity(*family->impl, J, ref_index);
    if (theta_star) {
      for (int j = 0; j < J; ++j)
        theta.thetas[j].assign(theta_star + static_cast<std::ptrdiff_t>(j) * p,
                               theta_star + static_cast<std::ptrdiff_t>(j + 1) * p);
      theta.ref_value = theta.thetas[theta.ref_index];
    }
    GofLimitSampler sampler(family->impl, theta, Distribution::parse(err_id), grid_size,
                            centered != 0);
    RandomStream stream(seed);
    for (int64_t i = 0; i < count; ++i) out_draws[i] = sampler.draw(stream);
  });
}

}  // extern "C"
