#pragma once

#include <optional>
#include <string>
#include <vector>

#include "warpfit/boot.hpp"
#include "warpfit/distributions.hpp"

namespace warpfit {

// One synthetic dataset: J populations of size n, optionally with the last
// population swapped for a contaminant gamma.
struct ScenarioSpec {
  int J = 2;
  std::int64_t n = 100;
  std::vector<Distribution> populations;  // J entries
  std::optional<Distribution> gamma;
  std::string family_id = "location-scale";
  std::uint64_t seed = 0;

  void validate() const;
};

// Population lists of the simulation study, defined for J in {2, 3, 5, 10};
// the last slot is standard normal and is the one gamma replaces.
std::vector<Distribution> standard_populations(int J);

ScenarioSpec null_scenario(int J, std::int64_t n, std::uint64_t seed);
ScenarioSpec power_scenario(int J, std::int64_t n, const Distribution& gamma,
                            std::uint64_t seed);

std::vector<EmpiricalDistribution> generate(const ScenarioSpec& spec, RandomStream& stream);

// Fraction of K independent dataset draws the chosen test rejects.
// delta0 is only consulted for the threshold test.
double rejection_frequency(const ScenarioSpec& spec, TestReport::Kind kind, double delta0,
                           std::int64_t K, const BootstrapConfig& cfg);

struct ExperimentCell {
  int J = 0;
  std::int64_t n = 0;
  double beta = 0.0;  // resampling exponent, m_n = ceil(n^beta)
  double freq = 0.0;

  bool operator==(const ExperimentCell&) const = default;
};

struct ExperimentTable {
  std::vector<ExperimentCell> cells;
  std::int64_t K = 0;
  std::int64_t B = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentTable&) const = default;

  std::string to_csv() const;
  static ExperimentTable parse_csv(const std::string& text);
};

struct ExperimentGridPoint {
  int J;
  std::int64_t n;
  double beta;
};

ExperimentTable run_level_experiment(std::span<const ExperimentGridPoint> grid, std::int64_t K,
                                     std::int64_t B, double alpha, std::uint64_t seed,
                                     int threads);

ExperimentTable run_power_experiment(std::span<const ExperimentGridPoint> grid,
                                     const Distribution& gamma, std::int64_t K, std::int64_t B,
                                     double alpha, std::uint64_t seed, int threads);

}  // namespace warpfit
