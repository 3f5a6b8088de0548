#include "clonal/run.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

#include "clonal/analysis.hpp"
#include "clonal/errors.hpp"
#include "clonal/measures.hpp"
#include "clonal/scenarios.hpp"
#include "clonal/svg.hpp"

namespace clonal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool wants(const RunConfig& c, const std::string& name) {
  const auto& obs = c.output.observers;
  return std::find(obs.begin(), obs.end(), name) != obs.end();
}

// JSON has no NaN; missing values become null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double safe_lyapunov(double v1, double v2, const EquilibriumPoint& eq, const ModelParams& p) {
  if (!(v1 > 0.0) || !(v2 >= 0.0)) return kNaN;
  return lyapunov(v1, v2, eq, p);
}

nlohmann::json equilibrium_json(const Trajectory& traj, const EquilibriumPoint& eq) {
  const double r1 = traj.rho1.back();
  const double r2 = traj.rho2.back();
  return {{"a_bar", eq.a_bar},
          {"rho1_bar", eq.rho1_bar},
          {"rho2_bar", eq.rho2_bar},
          {"rel_error_rho1", number((r1 - eq.rho1_bar) / eq.rho1_bar)},
          {"rel_error_rho2", number((r2 - eq.rho2_bar) / eq.rho2_bar)}};
}

nlohmann::json final_json(const Trajectory& traj) {
  return {{"t", traj.times.back()},
          {"rho1", traj.rho1.back()},
          {"rho2", traj.rho2.back()},
          {"s", traj.s.back()}};
}

// Contiguous runs of indices.
std::vector<std::vector<std::size_t>> split_runs(const std::vector<std::size_t>& idx) {
  std::vector<std::vector<std::size_t>> runs;
  for (std::size_t i : idx) {
    if (runs.empty() || runs.back().back() + 1 != i) runs.emplace_back();
    runs.back().push_back(i);
  }
  return runs;
}

double cumulative_abs(const std::vector<double>& t, const std::vector<double>& f) {
  double sum = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    sum += 0.5 * (std::abs(f[k - 1]) + std::abs(f[k])) * (t[k] - t[k - 1]);
  }
  return sum;
}

RunResult run_continuum(const RunConfig& c) {
  const Grid& grid = c.grid;
  const Profile& profile = *c.profile;
  const ContinuumSystem sys(c.params, profile, grid);
  const PopulationState st0 = initial_state(c);

  const std::vector<std::size_t> top = argmax_set(profile, grid, 1e-9);
  const auto a = sys.self_renewal();
  const double a_bar = *std::max_element(a.begin(), a.end());
  const EquilibriumPoint eq = steady_state(a_bar, c.params);
  const double window = 5.0 * grid.spacing();
  const std::size_t n = grid.size();

  std::vector<Observer> observers;
  if (wants(c, "V")) {
    observers.push_back({"V", [&](double, std::span<const double> y) {
                           const Observables o = sys.observe(y);
                           return safe_lyapunov(o.rho1, o.rho2, eq, c.params);
                         }});
  }
  std::optional<DiscreteMeasure> limit;
  if (wants(c, "flat_dist")) {
    limit = predict_limit(st0, profile, c.params, grid);
    observers.push_back({"flat_dist", [&](double, std::span<const double> y) {
                           return flat_metric(DiscreteMeasure::from_density(y.first(n), grid),
                                              *limit);
                         }});
  }
  if (wants(c, "conc_frac")) {
    observers.push_back({"conc_frac", [&](double, std::span<const double> y) {
                           try {
                             return concentration_stats(y.first(n), grid, top, window);
                           } catch (const UndefinedFractionError&) {
                             return kNaN;
                           }
                         }});
  }
  // f1 is always sampled for the cumulative integral and dropped from the
  // output afterwards unless requested.
  observers.push_back({"f1", [&](double t, std::span<const double> y) {
                         return perturbation_f(sys.unpack(t, y), a_bar, c.params, profile, grid)
                             .first;
                       }});

  TrajectoryMeta meta{c.params, profile.id(), grid, std::nullopt};
  RunResult res{c, integrate(sys, sys.pack(st0), c.integrator, observers, meta), {}};
  Trajectory& traj = res.trajectory;
  const double f1_integral = cumulative_abs(traj.times, traj.column("f1"));
  if (!wants(c, "f1")) traj.columns.pop_back();

  nlohmann::json& s = res.summary;
  s["final"] = final_json(traj);
  s["equilibrium"] = equilibrium_json(traj, eq);
  s["perturbation"] = {{"a_bar", a_bar}, {"integral_abs_f1", f1_integral}};

  // execute() always snapshots t_end.
  const Snapshot& last = traj.snapshots.back();
  const PopulationState final_state = sys.unpack(last.t, last.state);

  nlohmann::json conc = {{"window", window}};
  double frac = kNaN;
  try {
    frac = concentration_stats(final_state.u1, grid, top, window);
  } catch (const UndefinedFractionError&) {
  }
  conc["fraction"] = number(frac);
  nlohmann::json sites = nlohmann::json::array();
  const double mass = total_mass(final_state.u1, grid);
  for (const auto& run : split_runs(top)) {
    double f = kNaN;
    try {
      f = concentration_stats(final_state.u1, grid, run, window);
    } catch (const UndefinedFractionError&) {
    }
    sites.push_back(
        {{"x", grid.node(run[run.size() / 2])}, {"fraction", number(f)}, {"mass", number(f * mass)}});
  }
  conc["sites"] = sites;
  s["concentration"] = conc;

  try {
    const BoundsCertificate cert = bounds_certificate(st0, profile, c.params, grid);
    const BoundsReport rep = check_bounds(traj, cert);
    s["bounds"] = {{"certificate", cert}, {"check", rep}};
  } catch (const PreconditionError& e) {
    s["bounds"] = {{"status", "not applicable"}, {"reason", e.what()}};
  }
  if (limit) {
    s["limit"] = {{"mass", limit->mass()},
                  {"final_flat_distance", traj.column("flat_dist").back()}};
  }
  return res;
}

RunResult run_two_compartment(const RunConfig& c) {
  const TwoCompartmentSystem sys(c.constant_a, c.params);
  const EquilibriumPoint eq = steady_state(c.constant_a, c.params);
  std::vector<Observer> observers;
  if (wants(c, "V")) {
    observers.push_back({"V", [&](double, std::span<const double> y) {
                           return safe_lyapunov(y[0], y[1], eq, c.params);
                         }});
  }
  TrajectoryMeta meta{c.params, "constant", std::nullopt, c.constant_a};
  RunResult res{c, integrate(sys, {c.initial.v1, c.initial.v2}, c.integrator, observers, meta),
                {}};
  nlohmann::json& s = res.summary;
  s["final"] = final_json(res.trajectory);
  s["equilibrium"] = equilibrium_json(res.trajectory, eq);
  try {
    const LyapunovReport rep = lyapunov_descent_check(res.trajectory, eq);
    s["lyapunov"] = rep;
  } catch (const DomainError& e) {
    s["lyapunov"] = {{"status", "not applicable"}, {"reason", e.what()}};
  }
  return res;
}

RunResult run_finite(const RunConfig& c) {
  const FiniteCloneSystem sys(*c.finite);
  std::vector<Observer> observers;
  auto column = [&](std::string name, std::size_t idx) {
    observers.push_back({std::move(name), [idx](double, std::span<const double> y) {
                           return y[idx];
                         }});
  };
  column("healthy_1", 0);
  column("healthy_2", 1);
  for (std::size_t k = 0; k < c.finite->clones.size(); ++k) {
    column("clone" + std::to_string(k + 1) + "_1", 2 * k + 2);
    column("clone" + std::to_string(k + 1) + "_2", 2 * k + 3);
  }
  TrajectoryMeta meta{c.params, "finite", std::nullopt, std::nullopt};
  RunResult res{c, integrate(sys, sys.pack(*c.finite), c.integrator, observers, meta), {}};
  nlohmann::json& s = res.summary;
  s["final"] = final_json(res.trajectory);
  nlohmann::json lines = nlohmann::json::array();
  for (std::size_t k = 0; k < res.trajectory.columns.size(); k += 2) {
    const auto& [name, v1] = res.trajectory.columns[k];
    const CloneParams& cp =
        k == 0 ? c.finite->healthy_params : c.finite->clone_params[k / 2 - 1];
    lines.push_back({{"line", name.substr(0, name.size() - 2)},
                     {"a", cp.a},
                     {"proliferating", v1.back()},
                     {"mature", res.trajectory.columns[k + 1].second.back()}});
  }
  s["lines"] = lines;
  return res;
}

std::string time_tag(double t) {
  std::ostringstream os;
  os << std::setprecision(12) << t;
  return os.str();
}

}  // namespace

RunResult execute(const RunConfig& config) {
  config.validate();
  RunConfig c = config;
  // The summary needs the final density of continuum runs.
  if (c.variant == ModelVariant::continuum) {
    auto& snaps = c.integrator.snapshot_times;
    if (std::find(snaps.begin(), snaps.end(), c.integrator.t_end) == snaps.end()) {
      snaps.push_back(c.integrator.t_end);
    }
  }
  RunResult res;
  switch (c.variant) {
    case ModelVariant::continuum: res = run_continuum(c); break;
    case ModelVariant::two_compartment: res = run_two_compartment(c); break;
    case ModelVariant::finite: res = run_finite(c); break;
  }
  res.config = config;
  nlohmann::json head = {{"name", config.name},
                         {"variant", to_string(config.variant)},
                         {"params", {{"p", config.params.p}, {"d", config.params.d},
                                     {"K", config.params.K}}},
                         {"dt", config.integrator.dt},
                         {"t_end", config.integrator.t_end},
                         {"samples", res.trajectory.size()}};
  if (config.profile) head["profile"] = config.profile->id();
  if (config.variant == ModelVariant::continuum) head["n_nodes"] = config.grid.size();
  head.update(res.summary);
  res.summary = std::move(head);
  // Snapshots the user did not ask for are not written.
  const auto& wanted = config.integrator.snapshot_times;
  std::erase_if(res.trajectory.snapshots, [&](const Snapshot& s) {
    return std::none_of(wanted.begin(), wanted.end(), [&](double t) {
      return std::abs(t - s.t) <= config.integrator.dt;
    });
  });
  return res;
}

void write_outputs(const RunResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    return os;
  };
  {
    auto os = open("trajectory.csv");
    write_trajectory_csv(os, res.trajectory);
  }
  const RunConfig& c = res.config;
  if (c.variant == ModelVariant::continuum) {
    for (const auto& snap : res.trajectory.snapshots) {
      auto os = open("snapshot_t" + time_tag(snap.t) + ".csv");
      write_snapshot_csv(os, c.grid, snap);
    }
  }
  {
    auto os = open("summary.json");
    os << res.summary.dump(2) << '\n';
  }
  if (!c.output.svg) return;

  const Trajectory& tr = res.trajectory;
  {
    std::vector<Series> series = {{"rho1", tr.times, tr.rho1}, {"rho2", tr.times, tr.rho2}};
    auto os = open("masses.svg");
    write_line_plot(os, c.name + ": total masses", "t", series);
  }
  if (c.variant == ModelVariant::continuum && !tr.snapshots.empty()) {
    const std::size_t n = c.grid.size();
    std::vector<Series> series;
    for (const auto& snap : tr.snapshots) {
      series.push_back({"u1, t=" + time_tag(snap.t), c.grid.nodes(),
                        std::vector<double>(snap.state.begin(), snap.state.begin() + n)});
    }
    auto os = open("densities.svg");
    write_line_plot(os, c.name + ": proliferating density", "x", series);
  }
}

std::vector<RunResult> sweep(const RunConfig& base, const std::string& key,
                             const std::vector<double>& values, const std::filesystem::path& dir,
                             std::size_t jobs) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::vector<RunConfig> configs;
  std::vector<std::string> tags;
  for (double v : values) {
    RunConfig c = base;
    apply_override(c, key, v);
    tags.push_back(key + "=" + time_tag(v));
    c.name = base.name + " " + tags.back();
    configs.push_back(std::move(c));
  }

  std::vector<RunResult> results(configs.size());
  jobs = std::max<std::size_t>(jobs, 1);
  for (std::size_t start = 0; start < configs.size(); start += jobs) {
    std::vector<std::future<RunResult>> batch;
    const std::size_t stop = std::min(configs.size(), start + jobs);
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { return execute(configs[i]); }));
    }
    for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
  }

  std::filesystem::create_directories(dir);
  std::ofstream table(dir / "sweep.csv");
  table << key << ",rho1,rho2\n" << std::setprecision(12);
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_outputs(results[i], dir / tags[i]);
    table << values[i] << ',' << results[i].trajectory.rho1.back() << ','
          << results[i].trajectory.rho2.back() << '\n';
  }
  return results;
}

}  // namespace clonal
