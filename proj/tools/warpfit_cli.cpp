// warpfit command-line tool. Talks to the library exclusively through the
// C API in warpfit/warpfit.h; file parsing and report formatting live here.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "warpfit/warpfit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void fail_usage(const std::string& msg) {
  throw CliError{kExitUsage, msg};
}

[[noreturn]] void fail_data(const std::string& msg) {
  throw CliError{kExitData, msg};
}

void check(wf_status status, int exit_code = kExitData) {
  if (status == WF_OK) return;
  throw CliError{exit_code, wf_last_error()};  // message carries the status name
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Dataset {
  std::vector<std::string> ids;     // sample ids in first-appearance order
  std::vector<double> values;       // concatenated, grouped by sample
  std::vector<std::int64_t> sizes;  // per-sample counts
};

// Long-form CSV `sample_id,value` with a mandatory header.
Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open input file " + path);
  std::string line;
  if (!std::getline(in, line)) fail_data("input file is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,value")
    fail_data("expected header 'sample_id,value' in " + path);

  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<double>> groups;
  Dataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      fail_data(path + ":" + std::to_string(lineno) + ": missing comma");
    std::string id = line.substr(0, comma);
    std::string num = line.substr(comma + 1);
    char* end = nullptr;
    double v = std::strtod(num.c_str(), &end);
    if (end == num.c_str() || *end != '\0' || !std::isfinite(v))
      fail_data(path + ":" + std::to_string(lineno) + ": bad value '" + num + "'");
    auto it = slot.find(id);
    if (it == slot.end()) {
      it = slot.emplace(id, groups.size()).first;
      groups.emplace_back();
      data.ids.push_back(id);
    }
    groups[it->second].push_back(v);
  }
  if (groups.empty()) fail_data("no data rows in " + path);
  for (const auto& g : groups) {
    data.sizes.push_back(static_cast<std::int64_t>(g.size()));
    data.values.insert(data.values.end(), g.begin(), g.end());
  }
  return data;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_data("cannot open output file " + path);
  out << text;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("WARPFIT_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  std::uint64_t seed = std::strtoull(env, &end, 10);
  if (*end != '\0') fail_usage("WARPFIT_SEED is not an unsigned integer");
  return seed;
}

struct FamilyHandle {
  wf_family* ptr = nullptr;
  explicit FamilyHandle(const std::string& id) : ptr(wf_family_create(id.c_str())) {
    if (!ptr) fail_usage(std::string("unknown family: ") + wf_last_error());
  }
  ~FamilyHandle() { wf_family_free(ptr); }
  FamilyHandle(const FamilyHandle&) = delete;
  FamilyHandle& operator=(const FamilyHandle&) = delete;
};

nlohmann::ordered_json report_json(const wf_test_report& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind == 0 ? "gof" : "threshold";
  j["statistic"] = r.statistic;
  j["critical_value"] = r.critical_value;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject != 0;
  j["n"] = r.n;
  j["m_n"] = r.m_n;
  j["B"] = r.B;
  j["alpha"] = r.alpha;
  j["seed"] = r.seed;
  j["nonconverged"] = r.nonconverged;
  return j;
}

struct TestOptions {
  std::string input;
  std::string family = "location-scale";
  std::string out;
  double alpha = 0.05;
  std::int64_t B = 500;
  double m_exp = 0.0;
  std::int64_t m = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int ref_index = -1;
  double delta0 = 0.0;
  int threads = 0;
};

int run_test(const TestOptions& opt, bool threshold, int threads) {
  Dataset data = load_csv(opt.input);
  const int J = static_cast<int>(data.sizes.size());
  if (J < 2) fail_data("tests need at least two samples");
  FamilyHandle fam(opt.family);

  wf_boot_config cfg = wf_boot_config_default();
  cfg.B = opt.B;
  cfg.m_exponent = opt.m_exp;
  cfg.m_explicit = opt.m;
  cfg.alpha = opt.alpha;
  cfg.seed = opt.seed_set ? opt.seed : default_seed();
  cfg.threads = threads;
  int ref = opt.ref_index >= 0 ? opt.ref_index : J - 1;

  wf_test_report report{};
  if (threshold) {
    check(wf_threshold_test(data.values.data(), data.sizes.data(), J, fam.ptr, ref,
                            opt.delta0, &cfg, &report));
  } else {
    check(wf_gof_test(data.values.data(), data.sizes.data(), J, fam.ptr, ref, &cfg, &report));
    double soft_cap = std::pow(static_cast<double>(report.n), 0.95);
    if (static_cast<double>(report.m_n) > soft_cap) {
      std::cerr << "warpfit: warning: m_n=" << report.m_n << " exceeds n^0.95="
                << fmt(soft_cap) << "; the bootstrap needs m_n/n -> 0\n";
    }
  }

  std::string text = report_json(report).dump(2) + "\n";
  if (opt.out.empty())
    std::cout << text;
  else
    write_text(opt.out, text);
  return report.reject ? kExitReject : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein variation, deformation alignment and bootstrap tests"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: all cores; never affects results)");

  // --- variation ---
  auto* cmd_var = app.add_subcommand("variation", "Wasserstein r-variation of the samples");
  std::string var_input, var_out;
  double var_r = 2.0;
  cmd_var->add_option("--input", var_input, "long-form CSV sample_id,value")->required();
  cmd_var->add_option("--r", var_r, "Wasserstein order (default 2)");
  cmd_var->add_option("--out", var_out, "write the result CSV here instead of stdout");

  // --- align ---
  auto* cmd_align = app.add_subcommand("align", "fit the deformation model");
  TestOptions align_opt;
  cmd_align->add_option("--input", align_opt.input)->required();
  cmd_align->add_option("--family", align_opt.family);
  cmd_align->add_option("--ref-index", align_opt.ref_index);
  auto* align_seed = cmd_align->add_option("--seed", align_opt.seed);
  cmd_align->add_option("--out", align_opt.out);

  // --- test gof / test threshold ---
  auto* cmd_test = app.add_subcommand("test", "bootstrap hypothesis tests");
  cmd_test->require_subcommand(1);
  TestOptions test_opt;
  CLI::Option* test_seed_opts[2];
  CLI::App* test_subs[2];
  for (int i = 0; i < 2; ++i) {
    CLI::App* sub = cmd_test->add_subcommand(i == 0 ? "gof" : "threshold",
                                             i == 0 ? "goodness-of-fit test of A = 0"
                                                    : "test of A >= delta0");
    sub->add_option("--input", test_opt.input)->required();
    sub->add_option("--family", test_opt.family);
    sub->add_option("--alpha", test_opt.alpha);
    sub->add_option("--B", test_opt.B);
    sub->add_option("--m-exp", test_opt.m_exp);
    sub->add_option("--m", test_opt.m);
    test_seed_opts[i] = sub->add_option("--seed", test_opt.seed);
    sub->add_option("--ref-index", test_opt.ref_index);
    sub->add_option("--out", test_opt.out);
    if (i == 1) sub->add_option("--delta0", test_opt.delta0)->required();
    test_subs[i] = sub;
  }

  // --- simulate level / simulate power ---
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo level and power tables");
  cmd_sim->require_subcommand(1);
  std::vector<int> sim_J{2};
  std::vector<std::int64_t> sim_n{100};
  std::vector<double> sim_beta{0.9};
  std::int64_t sim_K = 300, sim_B = 500;
  double sim_alpha = 0.05;
  std::uint64_t sim_seed = 0;
  std::string sim_out, sim_gamma;
  CLI::Option* sim_seed_opts[2];
  for (int i = 0; i < 2; ++i) {
    CLI::App* sub = cmd_sim->add_subcommand(i == 0 ? "level" : "power",
                                            i == 0 ? "rejection frequency under the null"
                                                   : "rejection frequency under a contaminant");
    sub->add_option("--J", sim_J, "sample counts (in {2,3,5,10})");
    sub->add_option("--n", sim_n, "sample sizes");
    sub->add_option("--m-exp", sim_beta, "resampling exponents");
    sub->add_option("--K", sim_K, "Monte Carlo repetitions");
    sub->add_option("--B", sim_B, "bootstrap replicates");
    sub->add_option("--alpha", sim_alpha);
    sim_seed_opts[i] = sub->add_option("--seed", sim_seed);
    sub->add_option("--out", sim_out, "table CSV path")->required();
    if (i == 1)
      sub->add_option("--gamma", sim_gamma, "contaminant: exp, laplace, t3, t4, normal:mu,sd")
          ->required();
  }

  // --- limit sample ---
  auto* cmd_limit = app.add_subcommand("limit", "asymptotic-law utilities");
  cmd_limit->require_subcommand(1);
  auto* cmd_ls = cmd_limit->add_subcommand("sample", "draw from the limiting law of n*A_n");
  std::string ls_family = "location", ls_err = "uniform", ls_out;
  int ls_J = 2;
  std::int64_t ls_grid = 2047, ls_count = 1000;
  std::uint64_t ls_seed = 0;
  bool ls_centered = false;
  cmd_ls->add_option("--family", ls_family);
  cmd_ls->add_option("--err", ls_err, "error law: uniform, gaussian, exp, laplace, t<df>");
  cmd_ls->add_option("--J", ls_J);
  cmd_ls->add_option("--grid", ls_grid, "interior quadrature points");
  cmd_ls->add_option("--count", ls_count);
  auto* ls_seed_opt = cmd_ls->add_option("--seed", ls_seed);
  cmd_ls->add_flag("--centered", ls_centered, "centered variant for heavy-tailed errors");
  cmd_ls->add_option("--out", ls_out, "CSV of draws")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "warpfit: usage-error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (threads <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }

  try {
    if (cmd_var->parsed()) {
      Dataset data = load_csv(var_input);
      const int J = static_cast<int>(data.sizes.size());
      if (J < 2) fail_data("variation needs at least two samples");
      double variation = 0.0;
      std::vector<double> per_sample(static_cast<std::size_t>(J));
      check(wf_variation(data.values.data(), data.sizes.data(), J, var_r, &variation,
                         per_sample.data()));
      std::ostringstream out;
      out << "metric,sample_id,value\n";
      out << "variation,," << fmt(variation) << "\n";
      for (int j = 0; j < J; ++j)
        out << "distance_to_center," << data.ids[static_cast<std::size_t>(j)] << ","
            << fmt(per_sample[static_cast<std::size_t>(j)]) << "\n";
      if (var_out.empty())
        std::cout << out.str();
      else
        write_text(var_out, out.str());
      return kExitOk;
    }

    if (cmd_align->parsed()) {
      Dataset data = load_csv(align_opt.input);
      const int J = static_cast<int>(data.sizes.size());
      if (J < 2) fail_data("alignment needs at least two samples");
      FamilyHandle fam(align_opt.family);
      const int p = wf_family_param_dim(fam.ptr);
      wf_opt_config cfg = wf_opt_config_default();
      cfg.seed = align_seed->count() ? align_opt.seed : default_seed();
      cfg.threads = threads;
      int ref = align_opt.ref_index >= 0 ? align_opt.ref_index : J - 1;
      std::vector<double> theta(static_cast<std::size_t>(J * p));
      wf_align_result res{};
      check(wf_align(data.values.data(), data.sizes.data(), J, fam.ptr, ref, nullptr, &cfg,
                     theta.data(), &res));
      nlohmann::ordered_json j;
      j["family"] = align_opt.family;
      j["ref_index"] = ref;
      j["cost"] = res.cost;
      j["converged"] = res.converged != 0;
      j["evaluations"] = res.evaluations;
      j["restarts_used"] = res.restarts_used;
      auto blocks = nlohmann::ordered_json::array();
      for (int jj = 0; jj < J; ++jj) {
        auto block = nlohmann::ordered_json::array();
        for (int u = 0; u < p; ++u)
          block.push_back(theta[static_cast<std::size_t>(jj * p + u)]);
        blocks.push_back(block);
      }
      j["theta_hat"] = blocks;
      std::string text = j.dump(2) + "\n";
      if (align_opt.out.empty())
        std::cout << text;
      else
        write_text(align_opt.out, text);
      return kExitOk;
    }

    if (cmd_test->parsed()) {
      bool threshold = test_subs[1]->parsed();
      test_opt.seed_set = test_seed_opts[threshold ? 1 : 0]->count() > 0;
      return run_test(test_opt, threshold, threads);
    }

    if (cmd_sim->parsed()) {
      bool power = sim_gamma.empty() ? false : true;
      if (!sim_seed_opts[power ? 1 : 0]->count()) sim_seed = default_seed();
      std::vector<int> grid_J;
      std::vector<std::int64_t> grid_n;
      std::vector<double> grid_beta;
      for (int J : sim_J)
        for (std::int64_t n : sim_n)
          for (double beta : sim_beta) {
            grid_J.push_back(J);
            grid_n.push_back(n);
            grid_beta.push_back(beta);
          }
      std::vector<double> freq(grid_J.size());
      check(wf_simulate(grid_J.data(), grid_n.data(), grid_beta.data(),
                        static_cast<int>(grid_J.size()), power ? sim_gamma.c_str() : nullptr,
                        sim_K, sim_B, sim_alpha, sim_seed, threads, freq.data(),
                        sim_out.c_str()));
      return kExitOk;
    }

    if (cmd_ls->parsed()) {
      FamilyHandle fam(ls_family);
      if (!ls_seed_opt->count()) ls_seed = default_seed();
      std::vector<double> draws(static_cast<std::size_t>(ls_count));
      check(wf_limit_sample(fam.ptr, nullptr, ls_J, ls_J - 1, ls_err.c_str(),
                            ls_centered ? 1 : 0, ls_grid, ls_count, ls_seed, draws.data()));
      std::ostringstream out;
      out << "draw\n";
      for (double d : draws) out << fmt(d) << "\n";
      write_text(ls_out, out.str());
      return kExitOk;
    }
  } catch (const CliError& e) {
    std::cerr << "warpfit: " << (e.code == kExitUsage ? "usage-error: " : "data-error: ")
              << e.message << "\n";
    return e.code;
  }

  std::cerr << "warpfit: usage-error: no subcommand\n";
  return kExitUsage;
}
