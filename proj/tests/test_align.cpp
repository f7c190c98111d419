#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "warpfit/align.hpp"
#include "warpfit/distributions.hpp"

using namespace warpfit;
using testsup::make_dist;
using testsup::random_dist;

namespace {

ParameterVector theta_of(const DeformationFamily& fam, int J, int ref,
                         std::vector<std::vector<double>> blocks) {
  ParameterVector theta = ParameterVector::pinned_identity(fam, J, ref);
  theta.thetas = std::move(blocks);
  theta.ref_value = theta.thetas[static_cast<std::size_t>(ref)];
  return theta;
}

std::vector<EmpiricalDistribution> normal_pair(std::int64_t n, double mu2, double sigma2,
                                               RandomStream& rng) {
  auto gauss = Distribution::normal(0.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  for (auto& x : a) x = gauss.sample(rng);
  for (auto& x : b) x = mu2 + sigma2 * gauss.sample(rng);
  return {make_dist(a), make_dist(b)};
}

}  // namespace

TEST_CASE("alignment_cost worked examples") {
  auto ls = location_scale_family();
  RandomStream rng(8);
  std::vector<EmpiricalDistribution> ds = {random_dist(rng, 9), random_dist(rng, 9)};

  auto identity = ParameterVector::pinned_identity(*ls, 2, 1);
  double raw = variation_r(ds, 2);
  CHECK(alignment_cost(ds, *ls, identity) == doctest::Approx(raw * raw).epsilon(1e-12));

  auto scale = scale_family();
  std::vector<EmpiricalDistribution> prop = {make_dist({1, 2}), make_dist({2, 4})};
  auto theta = theta_of(*scale, 2, 0, {{1.0}, {0.5}});
  CHECK(alignment_cost(prop, *scale, theta) == doctest::Approx(0.0).epsilon(1e-14));

  for (int rep = 0; rep < 40; ++rep) {
    auto probe = theta_of(*ls, 2, 1,
                          {{4.0 * (rng.next_uniform() - 0.5), 0.5 + rng.next_uniform()},
                           {0.0, 1.0}});
    CHECK(alignment_cost(ds, *ls, probe) >= 0.0);
  }
}

TEST_CASE("minimize_alignment recovers an exact proportionality") {
  auto scale = scale_family();
  std::vector<EmpiricalDistribution> ds = {make_dist({1, 2}), make_dist({2, 4})};
  auto res = minimize_alignment(ds, *scale, 0);
  CHECK(res.cost < 1e-10);
  CHECK(res.theta_hat.thetas[1][0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(res.converged);
  CHECK(res.restarts_used == 5);
  CHECK(alignment_cost(ds, *scale, res.theta_hat) == doctest::Approx(res.cost).epsilon(1e-12));
}

TEST_CASE("identical samples align at the identity with zero cost") {
  auto ls = location_scale_family();
  RandomStream rng(9);
  auto base = random_dist(rng, 25);
  std::vector<EmpiricalDistribution> ds = {base, base, base};
  auto res = minimize_alignment(ds, *ls, 2);
  CHECK(res.cost < 1e-10);
  for (int j = 0; j < 3; ++j) {
    CHECK(res.theta_hat.thetas[static_cast<std::size_t>(j)][0] ==
          doctest::Approx(0.0).epsilon(1e-4));
    CHECK(res.theta_hat.thetas[static_cast<std::size_t>(j)][1] ==
          doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("shapes that are not scale-related keep a positive cost") {
  RandomStream rng(10);
  auto gauss = Distribution::normal(0.0, 1.0);
  auto expo = Distribution::exponential1();
  std::vector<double> a(500), b(500);
  for (auto& x : a) x = gauss.sample(rng);
  for (auto& x : b) x = expo.sample(rng);
  std::vector<EmpiricalDistribution> ds = {make_dist(a), make_dist(b)};
  auto res = minimize_alignment(ds, *scale_family(), 0);
  CHECK(res.cost > 0.01);
}

TEST_CASE("no probe beats the reported minimum") {
  auto ls = location_scale_family();
  RandomStream rng(12);
  auto ds = normal_pair(60, 1.0, 1.5, rng);
  OptimizerConfig cfg;
  cfg.seed = 5;
  auto res = minimize_alignment(ds, *ls, 1, cfg);
  for (int rep = 0; rep < 100; ++rep) {
    auto probe = theta_of(*ls, 2, 1,
                          {{6.0 * (rng.next_uniform() - 0.5), 0.2 + 2.5 * rng.next_uniform()},
                           {0.0, 1.0}});
    CHECK(alignment_cost(ds, *ls, probe) >= res.cost - 1e-9);
  }
}

TEST_CASE("determinism and thread invariance of the optimizer") {
  auto ls = location_scale_family();
  RandomStream rng(13);
  auto ds = normal_pair(50, 0.5, 2.0, rng);
  OptimizerConfig serial;
  serial.seed = 99;
  OptimizerConfig threaded = serial;
  threaded.threads = 4;
  auto r1 = minimize_alignment(ds, *ls, 1, serial);
  auto r2 = minimize_alignment(ds, *ls, 1, serial);
  auto r3 = minimize_alignment(ds, *ls, 1, threaded);
  CHECK(r1.cost == r2.cost);
  CHECK(r1.theta_hat.thetas == r2.theta_hat.thetas);
  CHECK(r1.cost == r3.cost);
  CHECK(r1.theta_hat.thetas == r3.theta_hat.thetas);
}

TEST_CASE("scale_closed_form worked examples and optimizer agreement") {
  CHECK(scale_closed_form(make_dist({1, 2}), make_dist({2, 4})) == doctest::Approx(0.5));
  auto self = make_dist({0.5, 1.5, 2.5});
  CHECK(scale_closed_form(self, self) == doctest::Approx(1.0));
  CHECK_THROWS_AS(scale_closed_form(make_dist({1, 2}), make_dist({0, 0})), error);

  auto scale = scale_family();
  RandomStream rng(14);
  for (int rep = 0; rep < 50; ++rep) {
    std::int64_t n = 10 + static_cast<std::int64_t>(rng.next_below(120));
    std::vector<double> base(static_cast<std::size_t>(n));
    for (auto& x : base) x = 0.2 + 3.0 * rng.next_uniform();
    double truth = 0.4 + 2.0 * rng.next_uniform();
    std::vector<double> second(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) second[i] = base[i] / truth;
    std::vector<EmpiricalDistribution> ds = {make_dist(base), make_dist(second)};

    double closed = scale_closed_form(ds[0], ds[1]);
    OptimizerConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(rep);
    auto fit = minimize_alignment(ds, *scale, 0, cfg);
    CHECK(std::abs(closed - fit.theta_hat.thetas[1][0]) < 1e-6);
    CHECK(closed == doctest::Approx(truth).epsilon(1e-9));
  }
}

TEST_CASE("null-model alignment cost shrinks with the sample size") {
  auto ls = location_scale_family();
  const std::int64_t sizes[3] = {100, 400, 1600};
  double medians[3];
  RandomStream rng(15);
  for (int s = 0; s < 3; ++s) {
    std::vector<double> costs;
    for (int rep = 0; rep < 50; ++rep) {
      RandomStream sub = rng.child(static_cast<std::uint64_t>(s * 100 + rep));
      auto ds = normal_pair(sizes[s], 2.0, 1.5, sub);
      OptimizerConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(rep);
      costs.push_back(minimize_alignment(ds, *ls, 1, cfg).cost);
    }
    std::sort(costs.begin(), costs.end());
    medians[s] = costs[costs.size() / 2];
  }
  CHECK(medians[0] > medians[1]);
  CHECK(medians[1] > medians[2]);
}

TEST_CASE("law of the minimal alignment cost is Lipschitz in the populations") {
  // Populations as small discrete measures; the scale-family box gives the
  // Lipschitz constant of the warp class.
  auto scaled = scale_family(ParamBox{{0.5}, {2.0}});
  double L = lipschitz_bound(*scaled, -3.0, 3.0, 32);
  CHECK(L == doctest::Approx(2.0));

  auto mu1 = make_dist({0.1, 0.7, 1.3, 2.1});
  auto mu2 = make_dist({0.4, 1.0, 1.8, 2.6});
  auto mu1p = make_dist({0.2, 0.8, 1.5, 2.0});
  auto mu2p = make_dist({0.3, 1.2, 1.7, 2.4});
  double gap = std::sqrt(0.5 * (std::pow(wasserstein_r(mu1, mu1p, 2), 2) +
                                std::pow(wasserstein_r(mu2, mu2p, 2), 2)));

  const int kDraws = 3000;
  const std::int64_t n = 30;
  std::vector<double> roots(kDraws), rootsp(kDraws);
  RandomStream rng(16);
  OptimizerConfig cfg;
  cfg.restarts = 2;  // benign one-dimensional landscape; keeps the test quick
  for (int k = 0; k < kDraws; ++k) {
    RandomStream sub = rng.child(static_cast<std::uint64_t>(k));
    cfg.seed = static_cast<std::uint64_t>(k);
    std::vector<EmpiricalDistribution> ds = {resample(mu1, n, sub), resample(mu2, n, sub)};
    roots[static_cast<std::size_t>(k)] =
        std::sqrt(minimize_alignment(ds, *scaled, 1, cfg).cost);
    std::vector<EmpiricalDistribution> dsp = {resample(mu1p, n, sub), resample(mu2p, n, sub)};
    rootsp[static_cast<std::size_t>(k)] =
        std::sqrt(minimize_alignment(dsp, *scaled, 1, cfg).cost);
  }
  CHECK(testsup::w2_between_draws(roots, rootsp) <= L * gap + 0.05);
}
