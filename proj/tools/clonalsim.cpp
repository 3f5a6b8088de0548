// clonalsim: run scenarios, compare measures and replay the property suites.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 verification failure.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "clonal/analysis.hpp"
#include "clonal/config.hpp"
#include "clonal/errors.hpp"
#include "clonal/measures.hpp"
#include "clonal/run.hpp"
#include "clonal/scenarios.hpp"
#include "clonal/verify.hpp"

namespace {

using namespace clonal;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kVerifyFailed = 4;

struct Source {
  std::string config;
  std::string preset;
  std::string out;
};

RunConfig resolve(const Source& src) {
  if (src.config.empty() == src.preset.empty()) {
    throw ConfigError("give exactly one of --config and --preset");
  }
  RunConfig c = src.config.empty() ? preset(src.preset) : load_config(src.config);
  if (!src.out.empty()) c.output.dir = src.out;
  return c;
}

void print_run(const RunResult& r) {
  const auto& s = r.summary;
  std::cout << std::setprecision(8) << r.config.name << ": t = " << s["final"]["t"]
            << ", rho1 = " << s["final"]["rho1"] << ", rho2 = " << s["final"]["rho2"] << '\n';
  if (s.contains("equilibrium")) {
    std::cout << "  equilibrium (a_bar = " << s["equilibrium"]["a_bar"]
              << "): rho1_bar = " << s["equilibrium"]["rho1_bar"]
              << ", rho2_bar = " << s["equilibrium"]["rho2_bar"] << '\n';
  }
  if (s.contains("concentration")) {
    std::cout << "  concentration fraction = " << s["concentration"]["fraction"] << '\n';
  }
  if (s.contains("bounds") && s["bounds"].contains("check")) {
    std::cout << "  bound check: "
              << (s["bounds"]["check"]["passed"].get<bool>() ? "passed" : "VIOLATED") << '\n';
  }
  std::cout << "  output: " << r.config.output.dir << '\n';
}

DiscreteMeasure read_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open measure file '" + path + "'");
  return read_measure_csv(in, path);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw ConfigError("--values: not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

int run_metric(const std::string& a, const std::string& b) {
  const DiscreteMeasure mu = read_measure_file(a);
  const DiscreteMeasure nu = read_measure_file(b);
  std::cout << std::setprecision(12);
  std::cout << "flat_metric       " << flat_metric(mu, nu) << '\n';
  const double ma = mu.mass();
  const double mb = nu.mass();
  if (std::abs(ma - mb) <= 1e-12 * std::max(1.0, std::max(ma, mb))) {
    // Equal masses m: transport cost m * W1 of the normalized measures.
    const double w = ma > 0.0 ? ma * wasserstein1(mu.normalized(), nu.normalized()) : 0.0;
    std::cout << "wasserstein1      " << w << '\n';
  } else {
    std::cout << "wasserstein1      n/a (masses " << ma << " and " << mb << " differ)\n";
  }
  std::cout << "flat_upper_bound  " << flat_upper_bound(mu, nu) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification of the two-compartment clonal selection model"};
  app.require_subcommand(1);

  std::string preset_list;
  for (const auto& n : preset_names()) preset_list += (preset_list.empty() ? "" : ", ") + n;

  Source run_src;
  auto* run = app.add_subcommand("run", "Integrate one configuration and write its outputs");
  run->add_option("--config", run_src.config, "INI configuration file");
  run->add_option("--preset", run_src.preset, "Named scenario: " + preset_list);
  run->add_option("--out", run_src.out, "Output directory (overrides [output] dir)");

  std::string metric_a, metric_b;
  auto* metric = app.add_subcommand("metric", "Distances between two measure CSV files");
  metric->add_option("A", metric_a, "position,weight CSV")->required();
  metric->add_option("B", metric_b, "position,weight CSV")->required();

  std::string suite = "all";
  std::uint64_t seed = 0;
  auto* verify = app.add_subcommand("verify", "Run property suites with a fixed seed");
  std::string suite_help = "all";
  for (const auto& n : suite_names()) suite_help += ", " + n;
  verify->add_option("suite", suite, "Suite: " + suite_help);
  verify->add_option("--seed", seed, "Random seed");

  double eq_a = 0.9;
  ModelParams eq_params;
  auto* equilibrium = app.add_subcommand("equilibrium", "Positive equilibrium of the constant-a system");
  equilibrium->add_option("--a", eq_a, "Self-renewal fraction in (1/2, 1)");
  equilibrium->add_option("--p", eq_params.p, "Proliferation rate");
  equilibrium->add_option("--d", eq_params.d, "Death rate of mature cells");
  equilibrium->add_option("--K", eq_params.K, "Feedback coefficient");

  Source sweep_src;
  std::string sweep_key, sweep_values;
  std::size_t jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat a run over values of one parameter");
  sweep_cmd->add_option("--config", sweep_src.config, "INI configuration file");
  sweep_cmd->add_option("--preset", sweep_src.preset, "Named scenario: " + preset_list);
  sweep_cmd->add_option("--out", sweep_src.out, "Output directory");
  sweep_cmd->add_option("--param", sweep_key, "One of p, d, K, a, n_nodes, dt, t_end")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      const RunConfig c = resolve(run_src);
      const RunResult r = execute(c);
      write_outputs(r, c.output.dir);
      print_run(r);
      return kOk;
    }
    if (*metric) return run_metric(metric_a, metric_b);
    if (*verify) {
      bool ok = true;
      for (const auto& rep : run_suites(suite, seed)) {
        print_report(std::cout, rep);
        ok = ok && rep.passed();
      }
      return ok ? kOk : kVerifyFailed;
    }
    if (*equilibrium) {
      const EquilibriumPoint eq = steady_state(eq_a, eq_params);
      std::cout << std::setprecision(15) << "rho1_bar " << eq.rho1_bar << '\n'
                << "rho2_bar " << eq.rho2_bar << '\n'
                << "residual " << equilibrium_residual(eq, eq_params) << '\n';
      return kOk;
    }
    if (*sweep_cmd) {
      RunConfig c = resolve(sweep_src);
      const auto results = sweep(c, sweep_key, parse_values(sweep_values), c.output.dir, jobs);
      for (const auto& r : results) print_run(r);
      return kOk;
    }
  } catch (const IntegrationError& e) {
    std::cerr << "error: " << e.what() << " (last valid time " << e.last_valid_time() << ")\n";
    return kNumericalError;
  } catch (const DeterminismError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const UndefinedFractionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
