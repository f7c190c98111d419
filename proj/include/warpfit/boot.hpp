#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warpfit/align.hpp"

namespace warpfit {

// How bootstrap replicates are drawn.
//   per_sample: each of the J samples is resampled from itself; the natural
//     choice for the threshold test, whose critical values live around the
//     observed alignment cost.
//   from_first: all J bootstrap samples draw from the first sample, so the
//     deformation model holds exactly in the bootstrap world; this is the
//     goodness-of-fit protocol of the simulation study.
enum class Resampling { per_test_default, per_sample, from_first };

struct BootstrapConfig {
  std::int64_t B = 500;
  // m_n = ceil(n^m_exponent) unless m_explicit > 0. An unset exponent picks
  // the per-test default: 0.9 for the goodness-of-fit test, 0.5 for the
  // threshold test.
  std::optional<double> m_exponent;
  std::int64_t m_explicit = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  int threads = 1;
  Resampling resampling = Resampling::per_test_default;
  OptimizerConfig opt;

  std::int64_t resolve_m(std::int64_t n, double default_exponent) const;
  void validate() const;
};

struct TestReport {
  enum class Kind { gof, threshold };

  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 0.0;
  bool reject = false;
  std::int64_t n = 0;
  std::int64_t m_n = 0;
  std::int64_t B = 0;
  std::uint64_t seed = 0;
  Kind kind = Kind::gof;
  double alpha = 0.0;
  std::int64_t nonconverged = 0;  // replicates that exhausted the search budget
};

const char* test_kind_name(TestReport::Kind kind);

struct BootstrapStats {
  std::vector<double> values;  // sorted ascending minimal alignment costs A*_m
  std::int64_t nonconverged = 0;
};

// One bootstrap replicate draws J samples of size m_n (source governed by
// cfg.resampling, per_sample when left at the default) and refits the
// alignment. Deterministic given cfg.seed.
BootstrapStats bootstrap_statistics(std::span<const EmpiricalDistribution> ds,
                                    const DeformationFamily& fam, int ref_index,
                                    std::int64_t m, const BootstrapConfig& cfg);

// Order statistic at rank ceil(B * level), 1-based.
double empirical_quantile_of(std::span<const double> sorted_stats, double level);

TestReport gof_test(std::span<const EmpiricalDistribution> ds, const DeformationFamily& fam,
                    int ref_index, const BootstrapConfig& cfg);

TestReport threshold_test(std::span<const EmpiricalDistribution> ds,
                          const DeformationFamily& fam, int ref_index, double delta0,
                          const BootstrapConfig& cfg);

}  // namespace warpfit
