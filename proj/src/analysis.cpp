#include "clonal/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "clonal/errors.hpp"

namespace clonal {

EquilibriumPoint steady_state(double a_bar, const ModelParams& params) {
  params.validate();
  if (!(a_bar > 0.5 && a_bar < 1.0)) {
    std::ostringstream os;
    os << "no positive equilibrium for a = " << a_bar << " (need 1/2 < a < 1)";
    throw DomainError(os.str());
  }
  EquilibriumPoint eq;
  eq.a_bar = a_bar;
  eq.rho2_bar = (2.0 * a_bar - 1.0) / params.K;
  eq.rho1_bar = params.d * eq.rho2_bar / params.p;
  const double res = equilibrium_residual(eq, params);
  if (!(res < 1e-12)) {
    std::ostringstream os;
    os << "equilibrium residual " << res << " exceeds 1e-12";
    throw DomainError(os.str());
  }
  return eq;
}

double equilibrium_residual(const EquilibriumPoint& eq, const ModelParams& params) {
  const auto [r1, r2] = rhs_two_compartment(eq.rho1_bar, eq.rho2_bar, eq.a_bar, params);
  // Scaled by the size of the individual flux terms.
  const double scale = 1.0 + params.p * eq.rho1_bar + params.d * eq.rho2_bar;
  return std::max(std::abs(r1), std::abs(r2)) / scale;
}

double lyapunov_g(double xi, double a, double K) { return 2.0 * (1.0 - a / (1.0 + K * xi)); }

double lyapunov_g_integral(double v2, const EquilibriumPoint& eq, const ModelParams& params) {
  const double a = eq.a_bar;
  const double K = params.K;
  const double g_bar = lyapunov_g(eq.rho2_bar, a, K);
  const double dv = v2 - eq.rho2_bar;
  // Antiderivative of 1/G is (xi + (a/K) ln(1 + K xi - a)) / 2.
  const double log_ratio = std::log1p(K * dv / (1.0 + K * eq.rho2_bar - a));
  return g_bar * 0.5 * (dv + a / K * log_ratio);
}

double lyapunov(double v1, double v2, const EquilibriumPoint& eq, const ModelParams& params) {
  if (!(v1 > 0.0)) throw DomainError("Lyapunov function needs v1 > 0");
  if (!(v2 >= 0.0)) throw DomainError("Lyapunov function needs v2 >= 0");
  const double r = v1 / eq.rho1_bar - 1.0;
  const double v_first = r - std::log1p(r);
  const double v_second =
      (v2 - eq.rho2_bar) / eq.rho2_bar - lyapunov_g_integral(v2, eq, params) / eq.rho2_bar;
  const double g_bar = lyapunov_g(eq.rho2_bar, eq.a_bar, params.K);
  return v_first / (params.p * g_bar) + v_second / params.d;
}

LyapunovReport lyapunov_descent_check(const Trajectory& traj, const EquilibriumPoint& eq) {
  if (!traj.meta.constant_a) {
    throw ConfigError("Lyapunov check needs a constant-a two-compartment trajectory");
  }
  if (std::abs(*traj.meta.constant_a - eq.a_bar) > 1e-12) {
    std::ostringstream os;
    os << "trajectory uses a = " << *traj.meta.constant_a << " but equilibrium has a = "
       << eq.a_bar;
    throw ConfigError(os.str());
  }
  LyapunovReport rep;
  rep.values.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    rep.values.push_back(lyapunov(traj.rho1[k], traj.rho2[k], eq, traj.meta.params));
  }
  for (std::size_t k = 1; k < rep.values.size(); ++k) {
    rep.max_increase = std::max(rep.max_increase, rep.values[k] - rep.values[k - 1]);
  }
  rep.tolerance = 1e-8 * (1.0 + (rep.values.empty() ? 0.0 : rep.values.front()));
  rep.passed = rep.max_increase <= rep.tolerance;
  return rep;
}

BoundsCertificate bounds_certificate(const PopulationState& initial, const Profile& profile,
                                     const ModelParams& params, const Grid& grid) {
  params.validate();
  initial.validate(grid);
  const double rho1 = total_mass(initial.u1, grid);
  const double rho2 = total_mass(initial.u2, grid);
  if (!(rho1 > 0.0)) throw PreconditionError("bounds certificate needs rho1(0) > 0");

  const std::vector<double> a = profile.sample(grid);
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  BoundsCertificate c;
  c.a_bar = *hi;
  c.a_min = *lo;

  const double u2_max = *std::max_element(initial.u2.begin(), initial.u2.end());
  if (!(u2_max > 0.0)) throw PreconditionError("u2 initial data vanish; u1/u2 is unbounded");
  const double threshold = 1e-9 * u2_max;
  double sup_quotient = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (initial.u2[i] >= threshold) {
      sup_quotient = std::max(sup_quotient, initial.u1[i] / initial.u2[i]);
    } else {
      ++c.excluded_nodes;
    }
  }
  c.quotient_restricted = c.excluded_nodes > 0;

  const double p = params.p;
  const double d = params.d;
  const double K = params.K;
  c.M1 = std::max(sup_quotient, (2.0 * p * c.a_bar + d) / (2.0 * p * (1.0 - c.a_bar)));
  c.M2 = std::max(rho1, (2.0 * c.a_bar - 1.0) * c.M1 / K);
  c.M3 = std::max(rho2, 2.0 * p * c.M2 / d);
  c.gamma = std::min(0.5 * d / p, 0.9);
  c.M4 = std::max(rho2 / std::pow(rho1, c.gamma),
                  2.0 * p * std::pow(c.M2, 1.0 - c.gamma) / (d - c.gamma * p));
  c.M5 = std::min(rho1, std::pow((2.0 * c.a_min - 1.0) / (K * c.M4), 1.0 / c.gamma));
  return c;
}

BoundsReport check_bounds(const Trajectory& traj, const BoundsCertificate& cert) {
  constexpr double tol = kBoundsTolerance;
  BoundsReport rep;
  rep.samples = traj.size();
  auto note = [&](const char* name, double t, double value, double limit) {
    for (const auto& v : rep.violations) {
      if (v.bound == name) return;
    }
    rep.violations.push_back({name, t, value, limit});
    if (!rep.first_violation_time || t < *rep.first_violation_time) rep.first_violation_time = t;
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    const double r1 = traj.rho1[k];
    const double r2 = traj.rho2[k];
    if (r1 > cert.M2 * (1.0 + tol)) note("M2", t, r1, cert.M2);
    if (r2 > cert.M3 * (1.0 + tol)) note("M3", t, r2, cert.M3);
    const double interp = cert.M4 * std::pow(r1, cert.gamma);
    if (r2 > interp * (1.0 + tol)) note("M4", t, r2, interp);
    if (r1 < cert.M5 * (1.0 - tol)) note("M5", t, r1, cert.M5);
  }
  return rep;
}

double RatioEnvelope::operator()(double t) const { return initial_ratio * std::exp(rate * t); }

namespace {

double interpolate_nodal(std::span<const double> f, const Grid& grid, double x) {
  if (!grid.domain().contains(x)) throw DomainError("position outside the grid");
  const double s = std::clamp((x - grid.x_lo()) / grid.spacing(), 0.0,
                              static_cast<double>(grid.size() - 1));
  const auto i = std::min(static_cast<std::size_t>(s), grid.size() - 2);
  const double t = s - static_cast<double>(i);
  return f[i] + t * (f[i + 1] - f[i]);
}

}  // namespace

RatioEnvelope decay_envelope(double x1, double x2, const PopulationState& initial,
                             const Grid& grid, const BoundsCertificate& cert,
                             const ModelParams& params, const Profile& profile) {
  initial.validate(grid);
  const double a1 = profile(x1);
  const double a2 = profile(x2);
  if (!(a1 < a2)) {
    std::ostringstream os;
    os << "decay envelope needs a(x1) < a(x2); got " << a1 << " and " << a2;
    throw PreconditionError(os.str());
  }
  const double u_2 = interpolate_nodal(initial.u1, grid, x2);
  if (!(u_2 > 0.0)) throw PreconditionError("decay envelope needs u1(0, x2) > 0");
  const double u_1 = interpolate_nodal(initial.u1, grid, x1);
  return {u_1 / u_2, 2.0 * params.p * (a1 - a2) / (1.0 + params.K * cert.M3)};
}

std::pair<double, double> perturbation_f(const PopulationState& state, double a_bar,
                                         const ModelParams& params, const Profile& profile,
                                         const Grid& grid) {
  state.validate(grid);
  const std::vector<double> a = profile.sample(grid);
  const std::vector<double> w = grid.trapezoid_weights();
  double integral = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) integral += w[i] * (a[i] - a_bar) * state.u1[i];
  const double rho2 = total_mass(state.u2, grid);
  const double f1 = 2.0 * params.p / (1.0 + params.K * rho2) * integral;
  return {f1, -f1};
}

DiscreteMeasure predict_limit(const PopulationState& initial, const Profile& profile,
                              const ModelParams& params, const Grid& grid) {
  initial.validate(grid);
  const std::vector<std::size_t> top = argmax_set(profile, grid, 0.0);
  std::size_t runs = 1;
  for (std::size_t k = 1; k < top.size(); ++k) {
    if (top[k] != top[k - 1] + 1) ++runs;
  }
  if (runs > 1) {
    throw UnsupportedCaseError(
        "self-renewal maximum is attained at several separated places; the mass split is "
        "not determined by the equilibrium");
  }
  const double a_bar = profile(grid.node(top.front()));
  const EquilibriumPoint eq = steady_state(a_bar, params);
  if (top.size() == 1) return DiscreteMeasure::dirac(grid.node(top.front()), eq.rho1_bar);

  std::vector<double> masked(grid.size(), 0.0);
  for (std::size_t i : top) masked[i] = initial.u1[i];
  const double base = total_mass(masked, grid);
  if (!(base > 0.0)) {
    throw PreconditionError("initial u1 carries no mass on the set of maximal self-renewal");
  }
  const double c = eq.rho1_bar / base;
  for (double& v : masked) v *= c;
  return DiscreteMeasure::from_density(masked, grid);
}

namespace {

double pair_distance(const ContinuumSystem& sys, std::span<const double> y,
                     std::span<const double> z) {
  const std::size_t n = sys.grid().size();
  const Grid& g = sys.grid();
  return flat_metric(DiscreteMeasure::from_density(y.first(n), g),
                     DiscreteMeasure::from_density(z.first(n), g)) +
         flat_metric(DiscreteMeasure::from_density(y.subspan(n, n), g),
                     DiscreteMeasure::from_density(z.subspan(n, n), g));
}

}  // namespace

StabilityReport stability_check(const MeasureData& mu0, const MeasureData& nu0,
                                std::pair<double, double> epsilons, const ModelParams& params,
                                const Profile& profile, const Grid& grid,
                                const StabilityOptions& options) {
  const ContinuumSystem sys(params, profile, grid);
  auto initial = [&](const MeasureData& m, double eps) {
    return sys.pack({0.0, mollify(m.proliferating, eps, grid), mollify(m.mature, eps, grid)});
  };
  const std::vector<double> y0 = initial(mu0, epsilons.first);
  const std::vector<double> z0 = initial(nu0, epsilons.second);

  IntegratorConfig cfg;
  cfg.dt = options.dt;
  cfg.t_end = options.horizon;
  cfg.snapshot_times = {options.horizon};
  const Trajectory ty = integrate(sys, y0, cfg);
  const Trajectory tz = integrate(sys, z0, cfg);

  StabilityReport rep;
  rep.initial_distance = pair_distance(sys, y0, z0);
  rep.final_distance = pair_distance(sys, ty.snapshots.back().state, tz.snapshots.back().state);

  const double floor_rate = 2.0 / options.test_function_constant;
  for (std::size_t k = 1; k < tz.size(); ++k) {
    const double al = std::max(floor_rate, tz.rho1[k - 1] + params.d);
    const double ar = std::max(floor_rate, tz.rho1[k] + params.d);
    rep.alpha_integral += 0.5 * (al + ar) * (tz.times[k] - tz.times[k - 1]);
  }
  rep.bound = std::exp(rep.alpha_integral) * rep.initial_distance;

  if (rep.initial_distance == 0.0 && rep.final_distance > options.determinism_tolerance) {
    std::ostringstream os;
    os << "identical initial data produced solutions at flat distance " << rep.final_distance;
    throw DeterminismError(os.str());
  }
  rep.passed = rep.final_distance <= rep.bound + options.determinism_tolerance;
  return rep;
}

void to_json(nlohmann::json& j, const EquilibriumPoint& eq) {
  j = {{"a_bar", eq.a_bar}, {"rho1_bar", eq.rho1_bar}, {"rho2_bar", eq.rho2_bar}};
}

void to_json(nlohmann::json& j, const BoundsCertificate& c) {
  j = {{"M1", c.M1},
       {"M2", c.M2},
       {"M3", c.M3},
       {"M4", c.M4},
       {"gamma", c.gamma},
       {"M5", c.M5},
       {"a_bar", c.a_bar},
       {"a_min", c.a_min},
       {"quotient_restricted", c.quotient_restricted},
       {"excluded_nodes", c.excluded_nodes}};
}

void to_json(nlohmann::json& j, const BoundsReport& r) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"bound", v.bound}, {"t", v.t}, {"value", v.value}, {"limit", v.limit}});
  }
  j = {{"samples", r.samples}, {"passed", r.passed()}, {"violations", violations}};
  if (r.first_violation_time) j["first_violation_time"] = *r.first_violation_time;
}

void to_json(nlohmann::json& j, const LyapunovReport& r) {
  j = {{"samples", r.values.size()},
       {"max_increase", r.max_increase},
       {"tolerance", r.tolerance},
       {"passed", r.passed}};
  if (!r.values.empty()) {
    j["V_initial"] = r.values.front();
    j["V_final"] = r.values.back();
  }
}

void to_json(nlohmann::json& j, const StabilityReport& r) {
  j = {{"initial_distance", r.initial_distance},
       {"final_distance", r.final_distance},
       {"alpha_integral", r.alpha_integral},
       {"bound", std::isfinite(r.bound) ? nlohmann::json(r.bound) : nlohmann::json("inf")},
       {"passed", r.passed}};
}

}  // namespace clonal
