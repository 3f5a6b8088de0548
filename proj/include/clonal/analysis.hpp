#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "clonal/dynamics.hpp"
#include "clonal/measures.hpp"
#include "clonal/model.hpp"

namespace clonal {

/// Positive stationary point of the constant-a two-compartment system.
struct EquilibriumPoint {
  double a_bar = 0.0;
  double rho1_bar = 0.0;
  double rho2_bar = 0.0;
};

/// rho2 = (2a - 1)/K, rho1 = d rho2 / p. Throws DomainError for
/// a outside (1/2, 1), where no positive equilibrium exists.
EquilibriumPoint steady_state(double a_bar, const ModelParams& params);

/// Largest scaled residual of the two stationarity equations at `eq`.
double equilibrium_residual(const EquilibriumPoint& eq, const ModelParams& params);

/// G(xi) = 2 (1 - a / (1 + K xi)).
double lyapunov_g(double xi, double a, double K);

/// Closed form of the integral of G(rho2_bar)/G(xi) from rho2_bar to v2.
double lyapunov_g_integral(double v2, const EquilibriumPoint& eq, const ModelParams& params);

/// V(v1, v2) = V1 / (p G(rho2_bar)) + V2 / d for the constant-a system.
double lyapunov(double v1, double v2, const EquilibriumPoint& eq, const ModelParams& params);

struct LyapunovReport {
  std::vector<double> values;
  double max_increase = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Evaluates V along a two-compartment trajectory; passes iff no forward
/// difference exceeds 1e-8 * (1 + V(0)).
LyapunovReport lyapunov_descent_check(const Trajectory& traj, const EquilibriumPoint& eq);

/// Explicit constants from the boundedness and positivity arguments.
struct BoundsCertificate {
  double M1 = 0.0;  // sup of u1/u2
  double M2 = 0.0;  // rho1 <= M2
  double M3 = 0.0;  // rho2 <= M3
  double M4 = 0.0;  // rho2 <= M4 rho1^gamma
  double gamma = 0.0;
  double M5 = 0.0;  // rho1 >= M5
  double a_bar = 0.0;
  double a_min = 0.0;
  // Nodes whose u2 falls below 1e-9 * max(u2) are left out of sup u1/u2.
  bool quotient_restricted = false;
  std::size_t excluded_nodes = 0;
};

BoundsCertificate bounds_certificate(const PopulationState& initial, const Profile& profile,
                                     const ModelParams& params, const Grid& grid);

struct BoundViolation {
  std::string bound;
  double t = 0.0;
  double value = 0.0;
  double limit = 0.0;
};

struct BoundsReport {
  std::size_t samples = 0;
  std::vector<BoundViolation> violations;  // first violation per bound
  std::optional<double> first_violation_time;
  bool passed() const { return violations.empty(); }
};

inline constexpr double kBoundsTolerance = 1e-6;

BoundsReport check_bounds(const Trajectory& traj, const BoundsCertificate& cert);

/// Upper envelope r0 * exp(rate * t) for u1(t,x1)/u1(t,x2) when a(x1) < a(x2).
struct RatioEnvelope {
  double initial_ratio = 0.0;
  double rate = 0.0;  // 2p (a(x1) - a(x2)) / (1 + K M3) < 0

  double operator()(double t) const;
};

RatioEnvelope decay_envelope(double x1, double x2, const PopulationState& initial,
                             const Grid& grid, const BoundsCertificate& cert,
                             const ModelParams& params, const Profile& profile);

/// Mass-system perturbation relative to a constant a_bar:
/// f1 = 2p / (1 + K rho2) * integral (a(x) - a_bar) u1 dx, f2 = -f1.
std::pair<double, double> perturbation_f(const PopulationState& state, double a_bar,
                                         const ModelParams& params, const Profile& profile,
                                         const Grid& grid);

/// Predicted long-time limit of u1. A single maximiser gives rho1_bar at that
/// node; a plateau of maximisers gives c u1^0 restricted to it, with c chosen
/// so the mass is rho1_bar. Several separated maxima are rejected.
DiscreteMeasure predict_limit(const PopulationState& initial, const Profile& profile,
                              const ModelParams& params, const Grid& grid);

struct MeasureData {
  DiscreteMeasure proliferating;
  DiscreteMeasure mature;
};

struct StabilityReport {
  double initial_distance = 0.0;
  double final_distance = 0.0;
  double alpha_integral = 0.0;  // integral of alpha(s) over [0, T]
  double bound = 0.0;           // exp(alpha_integral) * initial_distance
  bool passed = false;
};

struct StabilityOptions {
  double horizon = 10.0;
  double dt = 0.01;
  double test_function_constant = 1.0;
  double determinism_tolerance = 1e-12;
};

/// Mollifies both data sets (at eps_mu and eps_nu), integrates both and
/// compares the flat distance of the solutions at the horizon, summed over
/// compartments, with the Gronwall bound. The exponent integrates
/// alpha(s) = max(2/C, rho1~(s) + d) along the second run.
StabilityReport stability_check(const MeasureData& mu0, const MeasureData& nu0,
                                std::pair<double, double> epsilons, const ModelParams& params,
                                const Profile& profile, const Grid& grid,
                                const StabilityOptions& options = {});

// Structured-document layout of certificates and reports.
void to_json(nlohmann::json& j, const EquilibriumPoint& eq);
void to_json(nlohmann::json& j, const BoundsCertificate& cert);
void to_json(nlohmann::json& j, const BoundsReport& report);
void to_json(nlohmann::json& j, const LyapunovReport& report);
void to_json(nlohmann::json& j, const StabilityReport& report);

}  // namespace clonal
