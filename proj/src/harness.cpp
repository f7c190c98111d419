#include "warpfit/harness.hpp"

#include <cstdio>
#include <sstream>

namespace warpfit {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t derived_seed(const RandomStream& parent, std::uint64_t index) {
  RandomStream s = parent.child(index);
  return s.next_u64();
}

}  // namespace

void ScenarioSpec::validate() const {
  if (J < 2) throw error(errc::invalid_spec, "scenario needs J >= 2");
  if (n < 2) throw error(errc::invalid_spec, "scenario needs n >= 2");
  if (populations.size() != static_cast<std::size_t>(J))
    throw error(errc::invalid_spec, "scenario needs one population per sample");
  family_by_id(family_id);
}

std::vector<Distribution> standard_populations(int J) {
  std::vector<Distribution> base = {
      Distribution::normal(0.0, 1.0),    Distribution::normal(5.0, 2.0),
      Distribution::normal(3.0, 1.0),    Distribution::normal(1.5, 3.0),
      Distribution::normal(7.0, 4.0),    Distribution::normal(2.5, 0.5),
      Distribution::normal(1.0, 1.5),    Distribution::normal(4.0, 3.0),
      Distribution::normal(6.0, 5.0),
  };
  std::vector<Distribution> out;
  switch (J) {
    case 2: out = {base[0]}; break;
    case 3: out = {base[0], base[1]}; break;
    case 5: out = {base[0], base[1], base[2], base[3]}; break;
    case 10: out = base; break;
    default:
      throw error(errc::invalid_spec, "standard populations are defined for J in {2,3,5,10}");
  }
  out.push_back(Distribution::normal(0.0, 1.0));  // slot the contaminant replaces
  return out;
}

ScenarioSpec null_scenario(int J, std::int64_t n, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.J = J;
  spec.n = n;
  spec.populations = standard_populations(J);
  spec.seed = seed;
  return spec;
}

ScenarioSpec power_scenario(int J, std::int64_t n, const Distribution& gamma,
                            std::uint64_t seed) {
  ScenarioSpec spec = null_scenario(J, n, seed);
  spec.gamma = gamma;
  return spec;
}

std::vector<EmpiricalDistribution> generate(const ScenarioSpec& spec, RandomStream& stream) {
  spec.validate();
  std::vector<EmpiricalDistribution> out;
  out.reserve(static_cast<std::size_t>(spec.J));
  for (int j = 0; j < spec.J; ++j) {
    const Distribution& pop =
        (spec.gamma && j == spec.J - 1) ? *spec.gamma : spec.populations[j];
    RandomStream sub = stream.child(static_cast<std::uint64_t>(j));
    std::vector<double> values(static_cast<std::size_t>(spec.n));
    for (auto& v : values) v = pop.sample(sub);
    out.push_back(EmpiricalDistribution::from_samples(values));
  }
  return out;
}

double rejection_frequency(const ScenarioSpec& spec, TestReport::Kind kind, double delta0,
                           std::int64_t K, const BootstrapConfig& cfg) {
  if (K < 1) throw error(errc::bad_argument, "rejection frequency needs K >= 1");
  spec.validate();
  auto fam = family_by_id(spec.family_id);
  const RandomStream root(cfg.seed);

  std::vector<int> rejects(static_cast<std::size_t>(K), 0);
  parallel_for(K, cfg.threads, [&](std::int64_t k) {
    RandomStream rep = root.child(static_cast<std::uint64_t>(k) + 1);
    RandomStream data = rep.child(0);
    std::vector<EmpiricalDistribution> ds = generate(spec, data);
    BootstrapConfig local = cfg;
    local.threads = 1;
    local.seed = derived_seed(rep, 1);
    TestReport report = kind == TestReport::Kind::gof
                            ? gof_test(ds, *fam, spec.J - 1, local)
                            : threshold_test(ds, *fam, spec.J - 1, delta0, local);
    rejects[static_cast<std::size_t>(k)] = report.reject ? 1 : 0;
  });

  std::int64_t total = 0;
  for (int r : rejects) total += r;
  return static_cast<double>(total) / static_cast<double>(K);
}

std::string ExperimentTable::to_csv() const {
  std::ostringstream out;
  out << "J,n,m_rule,freq,K,B,alpha,seed\n";
  for (const auto& cell : cells) {
    out << cell.J << ',' << cell.n << ',' << format_double(cell.beta) << ','
        << format_double(cell.freq) << ',' << K << ',' << B << ','
        << format_double(alpha) << ',' << seed << '\n';
  }
  return out.str();
}

ExperimentTable ExperimentTable::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "J,n,m_rule,freq,K,B,alpha,seed")
    throw error(errc::invalid_spec, "experiment CSV header mismatch");
  ExperimentTable table;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    ExperimentCell cell;
    char c1, c2, c3, c4, c5, c6, c7;
    std::int64_t K = 0, B = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    if (!(row >> cell.J >> c1 >> cell.n >> c2 >> cell.beta >> c3 >> cell.freq >> c4 >> K >>
          c5 >> B >> c6 >> alpha >> c7 >> seed) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',' || c6 != ',' || c7 != ',')
      throw error(errc::invalid_spec, "experiment CSV row malformed: " + line);
    if (first) {
      table.K = K;
      table.B = B;
      table.alpha = alpha;
      table.seed = seed;
      first = false;
    } else if (K != table.K || B != table.B || alpha != table.alpha || seed != table.seed) {
      throw error(errc::invalid_spec, "experiment CSV metadata differs across rows");
    }
    table.cells.push_back(cell);
  }
  return table;
}

namespace {

ExperimentTable run_experiment(std::span<const ExperimentGridPoint> grid,
                               const std::optional<Distribution>& gamma, std::int64_t K,
                               std::int64_t B, double alpha, std::uint64_t seed, int threads) {
  if (grid.empty()) throw error(errc::bad_argument, "experiment grid is empty");
  ExperimentTable table;
  table.K = K;
  table.B = B;
  table.alpha = alpha;
  table.seed = seed;
  const RandomStream root(seed);
  for (std::size_t row = 0; row < grid.size(); ++row) {
    const auto& point = grid[row];
    ScenarioSpec spec = gamma ? power_scenario(point.J, point.n, *gamma, seed)
                              : null_scenario(point.J, point.n, seed);
    BootstrapConfig cfg;
    cfg.B = B;
    cfg.m_exponent = point.beta;
    cfg.alpha = alpha;
    cfg.threads = threads;
    cfg.seed = derived_seed(root, row);
    double freq = rejection_frequency(spec, TestReport::Kind::gof, 0.0, K, cfg);
    table.cells.push_back({point.J, point.n, point.beta, freq});
  }
  return table;
}

}  // namespace

ExperimentTable run_level_experiment(std::span<const ExperimentGridPoint> grid, std::int64_t K,
                                     std::int64_t B, double alpha, std::uint64_t seed,
                                     int threads) {
  return run_experiment(grid, std::nullopt, K, B, alpha, seed, threads);
}

ExperimentTable run_power_experiment(std::span<const ExperimentGridPoint> grid,
                                     const Distribution& gamma, std::int64_t K, std::int64_t B,
                                     double alpha, std::uint64_t seed, int threads) {
  return run_experiment(grid, gamma, K, B, alpha, seed, threads);
}

}  // namespace warpfit
