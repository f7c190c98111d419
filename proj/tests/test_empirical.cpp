#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "test_support.hpp"
#include "warpfit/empirical.hpp"

using namespace warpfit;
using testsup::make_dist;
using testsup::random_dist;

namespace {

// Independent oracle: W_r of equal-size samples by sorted pairing.
double pairing_oracle(std::vector<double> a, std::vector<double> b, double r) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), r);
  return std::pow(s / static_cast<double>(a.size()), 1.0 / r);
}

// Independent oracle for the J=2 equal-size squared 2-variation: enumerate
// all permutation couplings of the order statistics.
double coupling_enumeration_oracle(const EmpiricalDistribution& a,
                                   const EmpiricalDistribution& b) {
  const std::size_t n = static_cast<std::size_t>(a.n());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double x = a.values()[i], y = b.values()[perm[i]];
      double mid = 0.5 * (x + y);
      total += 0.5 * ((x - mid) * (x - mid) + (y - mid) * (y - mid));
    }
    best = std::min(best, total / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("from_samples sorts and validates") {
  auto d = make_dist({3, 1, 2});
  CHECK(d.values() == std::vector<double>{1, 2, 3});
  auto single = make_dist({5});
  CHECK(single.values() == std::vector<double>{5});
  CHECK(single.n() == 1);
  auto ties = make_dist({2, 2, 2});
  CHECK(ties.values() == std::vector<double>{2, 2, 2});

  CHECK_THROWS_AS(EmpiricalDistribution::from_samples({}), error);
  std::vector<double> bad{1.0, std::nan("")};
  CHECK_THROWS_AS(EmpiricalDistribution::from_samples(bad), error);
  std::vector<double> inf{1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(EmpiricalDistribution::from_samples(inf), error);
}

TEST_CASE("quantile follows the left-continuous convention") {
  auto d = make_dist({1, 2, 3});
  CHECK(quantile(d, 0.5) == 2);
  CHECK(quantile(d, 1.0) == 3);
  CHECK(quantile(d, 0.34) == 2);  // ceil(3 * 0.34) = 2
  CHECK(quantile(d, 1.0 / 3.0) == 1);
  CHECK_THROWS_AS(quantile(d, 0.0), error);
  CHECK_THROWS_AS(quantile(d, 1.1), error);
  CHECK_THROWS_AS(quantile(d, -0.2), error);
}

TEST_CASE("wasserstein_r on the worked examples") {
  auto a = make_dist({0, 2});
  auto b = make_dist({1, 3});
  CHECK(wasserstein_r(a, b, 2) == doctest::Approx(pairing_oracle({0, 2}, {1, 3}, 2)));
  CHECK(wasserstein_r(a, b, 2) == doctest::Approx(1.0));
  CHECK(wasserstein_r(a, a, 1.7) == 0.0);
  CHECK(wasserstein_r(make_dist({0}), make_dist({3}), 1) == doctest::Approx(3.0));
  CHECK_THROWS_AS(wasserstein_r(a, b, 0.5), error);
}

TEST_CASE("wasserstein_r handles unequal sizes via the merged grid") {
  // [0,2] has quantile 0 on (0,1/2], 2 on (1/2,1]; [3] is constant 3.
  auto a = make_dist({0, 2});
  auto b = make_dist({3});
  double expected = 0.5 * 9.0 + 0.5 * 1.0;  // integral of |q_a - q_b|^2
  CHECK(wasserstein_r(a, b, 2) == doctest::Approx(std::sqrt(expected)));

  RandomStream rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    auto x = random_dist(rng, 1 + static_cast<std::int64_t>(rng.next_below(8)));
    // Same measure written with duplicated atoms must compare equal.
    std::vector<double> doubled;
    for (double v : x.values()) {
      doubled.push_back(v);
      doubled.push_back(v);
    }
    CHECK(wasserstein_r(x, make_dist(doubled), 2) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("metric axioms and positive homogeneity") {
  RandomStream rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    double r = (rep % 3 == 0) ? 1.0 : (rep % 3 == 1 ? 2.0 : 3.0);
    auto a = random_dist(rng, 1 + static_cast<std::int64_t>(rng.next_below(50)));
    auto b = random_dist(rng, 1 + static_cast<std::int64_t>(rng.next_below(50)));
    auto c = random_dist(rng, 1 + static_cast<std::int64_t>(rng.next_below(50)));

    double ab = wasserstein_r(a, b, r);
    double ba = wasserstein_r(b, a, r);
    CHECK(ab == ba);
    CHECK(wasserstein_r(a, a, r) == 0.0);
    double ac = wasserstein_r(a, c, r);
    double cb = wasserstein_r(c, b, r);
    CHECK(ab <= ac + cb + 1e-12);

    double scale = 0.25 + 3.0 * rng.next_uniform();
    std::vector<double> sa, sb;
    for (double v : a.values()) sa.push_back(scale * v);
    for (double v : b.values()) sb.push_back(scale * v);
    double scaled = wasserstein_r(make_dist(sa), make_dist(sb), r);
    CHECK(scaled == doctest::Approx(scale * ab).epsilon(1e-12));
  }
}

TEST_CASE("barycenter_quantile averages on the union grid") {
  auto qa = QuantileFunction::of(make_dist({0, 2}));
  auto qb = QuantileFunction::of(make_dist({1, 3}));

  SUBCASE("single input is the identity") {
    const QuantileFunction one[1] = {qa};
    auto bary = barycenter_quantile({one, 1});
    CHECK(bary.breakpoints == qa.breakpoints);
    CHECK(bary.levels == qa.levels);
  }

  SUBCASE("hand-averaged order statistics") {
    const QuantileFunction two[2] = {qa, qb};
    auto bary = barycenter_quantile({two, 2});
    CHECK(bary.breakpoints == std::vector<double>{0.5, 1.0});
    CHECK(bary.levels == std::vector<double>{0.5, 2.5});
  }

  SUBCASE("equal inputs return the common input") {
    const QuantileFunction three[3] = {qb, qb, qb};
    auto bary = barycenter_quantile({three, 3});
    CHECK(bary.levels == qb.levels);
  }

  CHECK_THROWS_AS(barycenter_quantile({}), error);
}

TEST_CASE("barycenter output is nondecreasing on random inputs") {
  RandomStream rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<QuantileFunction> qs;
    int J = 2 + static_cast<int>(rng.next_below(3));
    for (int j = 0; j < J; ++j)
      qs.push_back(QuantileFunction::of(random_dist(rng, 1 + static_cast<std::int64_t>(rng.next_below(9)))));
    auto bary = barycenter_quantile(qs);
    CHECK(std::is_sorted(bary.levels.begin(), bary.levels.end()));
  }
}

TEST_CASE("variation_r on the worked examples") {
  const EmpiricalDistribution pair[2] = {make_dist({0, 2}), make_dist({1, 3})};
  double v2 = variation_r({pair, 2}, 2);
  CHECK(v2 * v2 == doctest::Approx(coupling_enumeration_oracle(pair[0], pair[1])));
  CHECK(v2 == doctest::Approx(0.5));

  const EmpiricalDistribution same[3] = {make_dist({1, 4}), make_dist({1, 4}), make_dist({1, 4})};
  CHECK(variation_r({same, 3}, 2) == 0.0);

  const EmpiricalDistribution points[2] = {make_dist({0}), make_dist({2})};
  CHECK(variation_r({points, 2}, 2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(variation_r(std::span<const EmpiricalDistribution>{}, 2.0), error);
  CHECK_THROWS_AS(variation_r({pair, 2}, 0.3), error);
}

TEST_CASE("variation equals the mean squared distance to the barycenter") {
  RandomStream rng(31);
  for (int rep = 0; rep < 60; ++rep) {
    int J = 2 + static_cast<int>(rng.next_below(3));
    std::vector<EmpiricalDistribution> ds;
    std::vector<QuantileFunction> qs;
    for (int j = 0; j < J; ++j) {
      ds.push_back(random_dist(rng, 1 + static_cast<std::int64_t>(rng.next_below(10))));
      qs.push_back(QuantileFunction::of(ds.back()));
    }
    auto bary = barycenter_quantile(qs);
    double direct = variation_r(ds, 2);
    double via_bary = 0.0;
    for (const auto& q : qs) {
      double w = wasserstein_r(q, bary, 2);
      via_bary += w * w;
    }
    via_bary /= J;
    CHECK(direct * direct == doctest::Approx(via_bary).epsilon(1e-12));
  }
}

TEST_CASE("multimarginal oracle on the worked examples") {
  const EmpiricalDistribution pair[2] = {make_dist({0, 2}), make_dist({1, 3})};
  CHECK(multimarginal_variation_oracle({pair, 2}, 2) == doctest::Approx(0.25));

  const EmpiricalDistribution ones[2] = {make_dist({4}), make_dist({4})};
  CHECK(multimarginal_variation_oracle({ones, 2}, 2) == 0.0);

  const EmpiricalDistribution triple[3] = {make_dist({0, 1}), make_dist({0, 1}),
                                           make_dist({0, 1})};
  CHECK(multimarginal_variation_oracle({triple, 3}, 2) == doctest::Approx(0.0).epsilon(1e-12));

  RandomStream big_rng(1);
  const EmpiricalDistribution big[2] = {random_dist(big_rng, 101), random_dist(big_rng, 101)};
  CHECK_THROWS_AS(multimarginal_variation_oracle({big, 2}, 2), error);
  CHECK_THROWS_AS(multimarginal_variation_oracle({pair, 2}, 1.5), error);
}

TEST_CASE("LP route agrees with permutation enumeration") {
  RandomStream rng(99);
  for (int rep = 0; rep < 30; ++rep) {
    std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_below(3));
    std::vector<double> av(static_cast<std::size_t>(n)), bv(static_cast<std::size_t>(n));
    for (auto& x : av) x = rng.next_uniform() * 3.0;
    for (auto& x : bv) x = rng.next_uniform() * 3.0;
    EmpiricalDistribution a = make_dist(av), b = make_dist(bv);

    const EmpiricalDistribution equal_sizes[2] = {a, b};
    double via_perms = multimarginal_variation_oracle({equal_sizes, 2}, 2);
    CHECK(via_perms == doctest::Approx(coupling_enumeration_oracle(a, b)).epsilon(1e-9));

    // Writing b with every atom duplicated leaves the measure unchanged but
    // makes the sizes unequal, which forces the LP route.
    std::vector<double> doubled;
    for (double v : bv) {
      doubled.push_back(v);
      doubled.push_back(v);
    }
    const EmpiricalDistribution unequal_sizes[2] = {a, make_dist(doubled)};
    double via_lp = multimarginal_variation_oracle({unequal_sizes, 2}, 2);
    CHECK(via_lp == doctest::Approx(via_perms).epsilon(1e-9));
  }
}

TEST_CASE("variation matches the multimarginal oracle on tiny instances") {
  RandomStream rng(5150);
  for (int rep = 0; rep < 120; ++rep) {
    int J = 2 + static_cast<int>(rng.next_below(2));
    double r = rng.next_below(2) == 0 ? 1.0 : 2.0;
    std::vector<EmpiricalDistribution> ds;
    for (int j = 0; j < J; ++j) {
      std::int64_t n = 1 + static_cast<std::int64_t>(rng.next_below(4));
      std::vector<double> v(static_cast<std::size_t>(n));
      for (auto& x : v) x = rng.next_below(2) == 0 ? rng.next_uniform() * 4.0
                                                   : std::floor(rng.next_uniform() * 4.0);
      ds.push_back(make_dist(v));
    }
    double direct = variation_r(ds, r);
    double oracle = multimarginal_variation_oracle(ds, r);
    CHECK(std::pow(direct, r) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("oracle couplings have uniform marginals and unit mass") {
  RandomStream rng(400);
  for (int rep = 0; rep < 40; ++rep) {
    int J = 2 + static_cast<int>(rng.next_below(2));
    std::vector<EmpiricalDistribution> ds;
    for (int j = 0; j < J; ++j)
      ds.push_back(random_dist(rng, 1 + static_cast<std::int64_t>(rng.next_below(4))));
    auto coupling = multimarginal_variation_coupling(ds, 2.0);
    double total = std::accumulate(coupling.weights.begin(), coupling.weights.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    for (double w : coupling.weights) CHECK(w >= -1e-12);
    for (std::size_t j = 0; j < ds.size(); ++j)
      for (std::int64_t i = 0; i < ds[j].n(); ++i)
        CHECK(coupling.marginal(j, i) ==
              doctest::Approx(1.0 / static_cast<double>(ds[j].n())).epsilon(1e-9));
    CHECK(coupling.cost ==
          doctest::Approx(multimarginal_variation_oracle(ds, 2.0)).epsilon(1e-9));
  }
}

TEST_CASE("law of the empirical distance is Lipschitz in the sampling law") {
  // Draws of W_2(nu_n, eta) under nu and under nu' can move at most
  // W_2(nu, nu') apart in Wasserstein distance.
  auto nu = make_dist({0.0, 0.5, 1.2, 2.0});
  auto nup = make_dist({0.2, 0.8, 1.4, 2.3});
  auto eta = make_dist({0.1, 1.0, 1.9});
  double bound = wasserstein_r(nu, nup, 2);

  const int kDraws = 10000;
  const std::int64_t n = 35;
  std::vector<double> d(kDraws), dp(kDraws);
  RandomStream rng(401);
  for (int k = 0; k < kDraws; ++k) {
    RandomStream sub = rng.child(static_cast<std::uint64_t>(k));
    d[static_cast<std::size_t>(k)] = wasserstein_r(resample(nu, n, sub), eta, 2);
    dp[static_cast<std::size_t>(k)] = wasserstein_r(resample(nup, n, sub), eta, 2);
  }
  CHECK(testsup::w2_between_draws(d, dp) <= bound + 0.05);
}

TEST_CASE("resample is deterministic and respects the support") {
  auto singleton = make_dist({5});
  RandomStream s1(42);
  auto r1 = resample(singleton, 3, s1);
  CHECK(r1.values() == std::vector<double>{5, 5, 5});

  RandomStream data_rng(3);
  auto d = random_dist(data_rng, 20);
  RandomStream a(123), b(123);
  CHECK(resample(d, 17, a).values() == resample(d, 17, b).values());

  // Binomial check: fraction of ones from {0,1} within 4 sigma of 1/2.
  auto coin = make_dist({0, 1});
  RandomStream c(777);
  auto draws = resample(coin, 10000, c);
  double ones = std::accumulate(draws.values().begin(), draws.values().end(), 0.0);
  double se = std::sqrt(0.25 / 10000.0);
  CHECK(std::abs(ones / 10000.0 - 0.5) < 4.0 * se);

  CHECK_THROWS_AS(resample(d, 0, a), error);
}

TEST_CASE("law of the empirical variation is Lipschitz in the inputs") {
  // Two pairs of discrete populations with a known W_2 gap; the laws of
  // V_2 computed from n-sized draws must be at least as close.
  auto nu1 = make_dist({0.0, 0.4, 1.1, 2.0});
  auto nu2 = make_dist({0.3, 0.9, 1.4, 2.2});
  auto nu1p = make_dist({0.1, 0.5, 1.3, 2.3});
  auto nu2p = make_dist({0.2, 1.0, 1.6, 2.1});

  double bound = std::sqrt(0.5 * (std::pow(wasserstein_r(nu1, nu1p, 2), 2) +
                                  std::pow(wasserstein_r(nu2, nu2p, 2), 2)));

  const int kDraws = 10000;
  const std::int64_t n = 40;
  std::vector<double> v(kDraws), vp(kDraws);
  RandomStream rng(2718);
  for (int k = 0; k < kDraws; ++k) {
    RandomStream sub = rng.child(static_cast<std::uint64_t>(k));
    EmpiricalDistribution ds[2] = {resample(nu1, n, sub), resample(nu2, n, sub)};
    v[static_cast<std::size_t>(k)] = variation_r({ds, 2}, 2);
    EmpiricalDistribution dsp[2] = {resample(nu1p, n, sub), resample(nu2p, n, sub)};
    vp[static_cast<std::size_t>(k)] = variation_r({dsp, 2}, 2);
  }
  double lhs = testsup::w2_between_draws(v, vp);
  CHECK(lhs <= bound + 0.05);
}
