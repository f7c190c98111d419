#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "warpfit/harness.hpp"

using namespace warpfit;
using testsup::mean;

TEST_CASE("scenario validation and standard populations") {
  for (int J : {2, 3, 5, 10}) {
    auto pops = standard_populations(J);
    CHECK(pops.size() == static_cast<std::size_t>(J));
    null_scenario(J, 50, 1).validate();
  }
  CHECK_THROWS_AS(standard_populations(4), error);
  ScenarioSpec bad = null_scenario(2, 50, 1);
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), error);
  bad = null_scenario(2, 50, 1);
  bad.family_id = "no-such-family";
  CHECK_THROWS_AS(bad.validate(), error);
}

TEST_CASE("generate draws the announced populations") {
  auto spec = null_scenario(2, 100000, 3);
  RandomStream rng(3);
  auto ds = generate(spec, rng);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].n() == 100000);
  // Normal(0,1) moment check at 4 sigma.
  CHECK(std::abs(mean(ds[0].values())) < 4.0 / std::sqrt(100000.0));

  auto power = power_scenario(2, 5000, Distribution::exponential1(), 3);
  RandomStream rng2(9);
  auto alt = generate(power, rng2);
  CHECK(alt[1].values().front() >= 0.0);  // exponential support

  RandomStream a(4), b(4);
  auto d1 = generate(spec, a);
  auto d2 = generate(spec, b);
  CHECK(d1[0].values() == d2[0].values());
  CHECK(d1[1].values() == d2[1].values());
}

TEST_CASE("distribution parser accepts the study ids") {
  CHECK(Distribution::parse("exp").kind == Distribution::Kind::exponential);
  CHECK(Distribution::parse("laplace").kind == Distribution::Kind::laplace);
  CHECK(Distribution::parse("t3").p1 == 3.0);
  CHECK(Distribution::parse("t4").p1 == 4.0);
  auto n52 = Distribution::parse("normal:5,2");
  CHECK(n52.p1 == 5.0);
  CHECK(n52.p2 == 2.0);
  CHECK_THROWS_AS(Distribution::parse("cauchy"), error);
}

TEST_CASE("experiment table round-trips through CSV bit-exactly") {
  ExperimentTable table;
  table.K = 300;
  table.B = 500;
  table.alpha = 0.05;
  table.seed = 424242;
  table.cells = {{2, 500, 0.9, 0.048},
                 {2, 1000, 0.95, 1.0 / 3.0},
                 {5, 50, 1.0, 0.0}};
  std::string csv = table.to_csv();
  ExperimentTable parsed = ExperimentTable::parse_csv(csv);
  CHECK(parsed == table);
  CHECK(parsed.to_csv() == csv);

  CHECK_THROWS_AS(ExperimentTable::parse_csv("bogus\n1,2\n"), error);
}

TEST_CASE("rejection frequency is deterministic and a valid frequency") {
  auto spec = null_scenario(2, 60, 0);
  BootstrapConfig cfg;
  cfg.B = 60;
  cfg.seed = 11;
  cfg.threads = 2;
  double f1 = rejection_frequency(spec, TestReport::Kind::gof, 0.0, 25, cfg);
  cfg.threads = 1;
  double f2 = rejection_frequency(spec, TestReport::Kind::gof, 0.0, 25, cfg);
  CHECK(f1 == f2);
  CHECK(f1 >= 0.0);
  CHECK(f1 <= 1.0);
}

TEST_CASE("alpha near one almost always rejects") {
  // At alpha -> 1 the critical value collapses to the bootstrap minimum;
  // non-rejection then needs the statistic to undercut every replicate.
  auto spec = null_scenario(2, 100, 0);
  BootstrapConfig cfg;
  cfg.B = 200;
  cfg.seed = 13;
  cfg.alpha = 0.999;
  double f = rejection_frequency(spec, TestReport::Kind::gof, 0.0, 20, cfg);
  CHECK(f >= 0.9);
  cfg.alpha = 0.05;
  double f05 = rejection_frequency(spec, TestReport::Kind::gof, 0.0, 20, cfg);
  CHECK(f >= f05);
}

TEST_CASE("level experiment produces one cell per grid point") {
  std::vector<ExperimentGridPoint> grid = {{2, 50, 0.9}, {2, 60, 0.8}};
  ExperimentTable table = run_level_experiment(grid, 10, 40, 0.05, 5, 2);
  REQUIRE(table.cells.size() == 2);
  CHECK(table.cells[0].J == 2);
  CHECK(table.cells[0].n == 50);
  CHECK(table.cells[0].beta == 0.9);
  for (const auto& cell : table.cells) {
    CHECK(cell.freq >= 0.0);
    CHECK(cell.freq <= 1.0);
  }
  CHECK(table.K == 10);
  CHECK(table.B == 40);

  ExperimentTable again = run_level_experiment(grid, 10, 40, 0.05, 5, 1);
  CHECK(again == table);

  ExperimentTable power =
      run_power_experiment(grid, Distribution::exponential1(), 20, 60, 0.05, 5, 2);
  REQUIRE(power.cells.size() == 2);
  // Exponential contamination is detected most of the time even at n = 50.
  CHECK(power.cells[0].freq >= 0.6);
  CHECK(power.cells[1].freq >= 0.6);
}

TEST_CASE("heavy-tailed contaminants are detected more often than the level") {
  // The t4 contaminant is hard at n = 100; power must still clear the level
  // and grow with n.
  BootstrapConfig cfg;
  cfg.B = 200;
  cfg.seed = 404;
  cfg.threads = 2;
  auto t4 = Distribution::student_t(4.0);
  double level = rejection_frequency(null_scenario(2, 100, 0), TestReport::Kind::gof, 0.0,
                                     40, cfg);
  double power_small =
      rejection_frequency(power_scenario(2, 100, t4, 0), TestReport::Kind::gof, 0.0, 40, cfg);
  double power_large =
      rejection_frequency(power_scenario(2, 400, t4, 0), TestReport::Kind::gof, 0.0, 40, cfg);
  CHECK(power_small > level);
  CHECK(power_large > power_small);
  CHECK(power_large >= 0.9);
}

TEST_CASE("threshold rejection frequency runs through the harness") {
  auto spec = null_scenario(2, 80, 0);
  BootstrapConfig cfg;
  cfg.B = 80;
  cfg.seed = 21;
  cfg.threads = 2;
  double f = rejection_frequency(spec, TestReport::Kind::threshold, 0.5, 15, cfg);
  CHECK(f == 1.0);  // generous threshold, model holds
}
