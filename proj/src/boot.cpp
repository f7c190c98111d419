#include "warpfit/boot.hpp"

#include <algorithm>
#include <cmath>

namespace warpfit {

namespace {

std::int64_t common_size(std::span<const EmpiricalDistribution> ds) {
  if (ds.size() < 2) throw error(errc::empty_collection, "tests need at least two samples");
  std::int64_t n = ds[0].n();
  for (const auto& d : ds) {
    if (d.n() != n)
      throw error(errc::invalid_spec, "bootstrap tests require equal sample sizes");
  }
  return n;
}

std::uint64_t derived_seed(const RandomStream& parent, std::uint64_t index) {
  RandomStream s = parent.child(index);
  return s.next_u64();
}

}  // namespace

std::int64_t BootstrapConfig::resolve_m(std::int64_t n, double default_exponent) const {
  if (m_explicit > 0) {
    if (m_explicit > n) throw error(errc::bad_argument, "explicit m exceeds n");
    return m_explicit;
  }
  double beta = m_exponent.value_or(default_exponent);
  if (!(beta > 0.0) || beta > 1.0)
    throw error(errc::bad_argument, "m exponent must lie in (0, 1]");
  auto m = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(n), beta)));
  return std::clamp<std::int64_t>(m, 1, n);
}

void BootstrapConfig::validate() const {
  if (B < 1) throw error(errc::bad_argument, "bootstrap needs B >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw error(errc::bad_argument, "alpha must lie in (0, 1)");
}

const char* test_kind_name(TestReport::Kind kind) {
  return kind == TestReport::Kind::gof ? "gof" : "threshold";
}

BootstrapStats bootstrap_statistics(std::span<const EmpiricalDistribution> ds,
                                    const DeformationFamily& fam, int ref_index,
                                    std::int64_t m, const BootstrapConfig& cfg) {
  cfg.validate();
  const auto J = static_cast<std::uint64_t>(ds.size());
  const bool from_first = cfg.resampling == Resampling::from_first;
  // per_test_default falls through to per-sample here; the tests override it.
  const RandomStream root(cfg.seed);

  BootstrapStats out;
  out.values.resize(static_cast<std::size_t>(cfg.B));
  std::vector<std::int64_t> flags(static_cast<std::size_t>(cfg.B), 0);

  parallel_for(cfg.B, cfg.threads, [&](std::int64_t b) {
    RandomStream replicate = root.child(static_cast<std::uint64_t>(b) + 1);
    std::vector<EmpiricalDistribution> stars;
    stars.reserve(ds.size());
    for (std::uint64_t j = 0; j < J; ++j) {
      RandomStream draw = replicate.child(j);
      stars.push_back(resample(ds[from_first ? 0 : j], m, draw));
    }
    OptimizerConfig opt = cfg.opt;
    opt.seed = derived_seed(replicate, J);
    opt.threads = 1;
    AlignmentResult fit = minimize_alignment(stars, fam, ref_index, opt);
    out.values[static_cast<std::size_t>(b)] = fit.cost;
    if (!fit.converged) flags[static_cast<std::size_t>(b)] = 1;
  });

  for (std::int64_t f : flags) out.nonconverged += f;
  std::sort(out.values.begin(), out.values.end());
  return out;
}

double empirical_quantile_of(std::span<const double> sorted_stats, double level) {
  if (sorted_stats.empty()) throw error(errc::empty_stats, "no bootstrap statistics");
  if (!(level > 0.0 && level < 1.0))
    throw error(errc::out_of_range, "quantile level must lie in (0, 1)");
  const auto B = static_cast<std::int64_t>(sorted_stats.size());
  auto rank = static_cast<std::int64_t>(std::ceil(level * static_cast<double>(B)));
  rank = std::clamp<std::int64_t>(rank, 1, B);
  return sorted_stats[static_cast<std::size_t>(rank - 1)];
}

TestReport gof_test(std::span<const EmpiricalDistribution> ds, const DeformationFamily& fam,
                    int ref_index, const BootstrapConfig& cfg) {
  cfg.validate();
  const std::int64_t n = common_size(ds);
  const std::int64_t m = cfg.resolve_m(n, 0.9);

  OptimizerConfig opt = cfg.opt;
  opt.seed = derived_seed(RandomStream(cfg.seed), 0);
  opt.threads = 1;
  AlignmentResult fit = minimize_alignment(ds, fam, ref_index, opt);

  BootstrapConfig boot_cfg = cfg;
  if (boot_cfg.resampling == Resampling::per_test_default)
    boot_cfg.resampling = Resampling::from_first;
  BootstrapStats stars = bootstrap_statistics(ds, fam, ref_index, m, boot_cfg);

  TestReport report;
  report.kind = TestReport::Kind::gof;
  report.statistic = static_cast<double>(n) * fit.cost;
  report.critical_value =
      static_cast<double>(m) * empirical_quantile_of(stars.values, 1.0 - cfg.alpha);
  std::int64_t at_least = 0;
  for (double a : stars.values)
    if (static_cast<double>(m) * a >= report.statistic) ++at_least;
  report.p_value = static_cast<double>(at_least) / static_cast<double>(cfg.B);
  // Rejection needs both the strict order-statistic comparison and p < alpha;
  // they differ only when B*alpha lands exactly on a tie, which resolves
  // toward non-rejection.
  report.reject = report.statistic > report.critical_value && report.p_value < cfg.alpha;
  report.n = n;
  report.m_n = m;
  report.B = cfg.B;
  report.seed = cfg.seed;
  report.alpha = cfg.alpha;
  report.nonconverged = stars.nonconverged + (fit.converged ? 0 : 1);
  return report;
}

TestReport threshold_test(std::span<const EmpiricalDistribution> ds,
                          const DeformationFamily& fam, int ref_index, double delta0,
                          const BootstrapConfig& cfg) {
  cfg.validate();
  if (!(delta0 > 0.0)) throw error(errc::bad_argument, "delta0 must be positive");
  const std::int64_t n = common_size(ds);
  const std::int64_t m = cfg.resolve_m(n, 0.5);

  OptimizerConfig opt = cfg.opt;
  opt.seed = derived_seed(RandomStream(cfg.seed), 0);
  opt.threads = 1;
  AlignmentResult fit = minimize_alignment(ds, fam, ref_index, opt);

  BootstrapConfig boot_cfg = cfg;
  if (boot_cfg.resampling == Resampling::per_test_default)
    boot_cfg.resampling = Resampling::per_sample;
  BootstrapStats stars = bootstrap_statistics(ds, fam, ref_index, m, boot_cfg);
  const double root_m = std::sqrt(static_cast<double>(m));
  std::vector<double> centered(stars.values.size());
  for (std::size_t b = 0; b < stars.values.size(); ++b)
    centered[b] = root_m * (stars.values[b] - delta0);

  TestReport report;
  report.kind = TestReport::Kind::threshold;
  report.statistic = std::sqrt(static_cast<double>(n)) * (fit.cost - delta0);
  report.critical_value = empirical_quantile_of(centered, cfg.alpha);
  std::int64_t at_most = 0;
  for (double c : centered)
    if (c <= report.statistic) ++at_most;
  report.p_value = static_cast<double>(at_most) / static_cast<double>(cfg.B);
  report.reject = report.statistic < report.critical_value;
  report.n = n;
  report.m_n = m;
  report.B = cfg.B;
  report.seed = cfg.seed;
  report.alpha = cfg.alpha;
  report.nonconverged = stars.nonconverged + (fit.converged ? 0 : 1);
  return report;
}

}  // namespace warpfit
