#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "clonal/errors.hpp"
#include "clonal/model.hpp"

namespace clonal {

/// Composite trapezoid integral of a nodal density.
double total_mass(std::span<const double> density, const Grid& grid);

struct DensityPair {
  std::vector<double> u1;
  std::vector<double> u2;
};

/// Nodewise right-hand side of the continuum system, with rho2 taken from
/// the trapezoid mass of `state.u2`.
DensityPair rhs_continuum(const PopulationState& state, const ModelParams& params,
                          const Profile& profile, const Grid& grid);

struct FiniteCloneDerivative {
  ClonePopulation healthy;
  std::vector<ClonePopulation> clones;
};

FiniteCloneDerivative rhs_finite(const FiniteCloneState& state);

std::pair<double, double> rhs_two_compartment(double v1, double v2, double a,
                                              const ModelParams& params);

/// Scalars recorded at every trajectory sample.
struct Observables {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double s = 1.0;
};

// Every model variant is integrated through this interface: a flat state
// vector, an autonomous derivative and a reduction to the recorded scalars.
template <typename S>
concept DynamicalSystem = requires(const S& sys, std::span<const double> y, std::span<double> dy) {
  { sys.dimension() } -> std::convertible_to<std::size_t>;
  sys.derivative(y, dy);
  { sys.observe(y) } -> std::same_as<Observables>;
};

/// Method-of-lines form of the continuum system. State layout is
/// [u1(x_0..x_{n-1}), u2(x_0..x_{n-1})].
class ContinuumSystem {
 public:
  ContinuumSystem(ModelParams params, const Profile& profile, Grid grid);

  std::size_t dimension() const { return 2 * grid_.size(); }
  void derivative(std::span<const double> y, std::span<double> dy) const;
  Observables observe(std::span<const double> y) const;

  std::vector<double> pack(const PopulationState& state) const;
  PopulationState unpack(double t, std::span<const double> y) const;

  const Grid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  std::span<const double> self_renewal() const { return a_; }
  std::span<const double> weights() const { return w_; }

 private:
  ModelParams params_;
  Grid grid_;
  std::vector<double> a_;
  std::vector<double> w_;
};

/// Constant-a system for the masses (v1, v2). State layout is [v1, v2].
class TwoCompartmentSystem {
 public:
  TwoCompartmentSystem(double a, ModelParams params);

  std::size_t dimension() const { return 2; }
  void derivative(std::span<const double> y, std::span<double> dy) const;
  Observables observe(std::span<const double> y) const;

  double a() const { return a_; }
  const ModelParams& params() const { return params_; }

 private:
  double a_;
  ModelParams params_;
};

/// Healthy line plus n clones. State layout is
/// [c1, c2, l^1_1, l^1_2, ..., l^n_1, l^n_2]. Observables report the summed
/// proliferating and mature populations and the shared signal.
class FiniteCloneSystem {
 public:
  explicit FiniteCloneSystem(FiniteCloneState prototype);

  std::size_t dimension() const { return 2 * (prototype_.clones.size() + 1); }
  void derivative(std::span<const double> y, std::span<double> dy) const;
  Observables observe(std::span<const double> y) const;

  std::vector<double> pack(const FiniteCloneState& state) const;
  FiniteCloneState unpack(std::span<const double> y) const;

 private:
  FiniteCloneState prototype_;
};

struct IntegratorConfig {
  double dt = 0.01;
  double t_end = 1.0;
  std::vector<double> snapshot_times;
  // Record every k-th step; the initial and final states are always kept.
  std::size_t record_stride = 1;

  void validate() const;
};

/// Extra scalar column filled at every recorded sample.
struct Observer {
  std::string name;
  std::function<double(double t, std::span<const double> y)> sample;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> state;
};

struct TrajectoryMeta {
  ModelParams params;
  std::string profile_id;
  std::optional<Grid> grid;
  std::optional<double> constant_a;
};

/// Dense scalar records plus sparse full-state snapshots.
struct Trajectory {
  TrajectoryMeta meta;
  std::vector<double> times;
  std::vector<double> rho1;
  std::vector<double> rho2;
  std::vector<double> s;
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  std::vector<Snapshot> snapshots;

  std::size_t size() const { return times.size(); }
  // Throws PreconditionError when no column has that name.
  const std::vector<double>& column(const std::string& name) const;
  const std::vector<double>* find_column(const std::string& name) const;
};

inline constexpr double kClampTolerance = 1e-12;

namespace detail {

// Checks y after a step; clamps tiny undershoots and throws otherwise.
void sanitize_state(std::span<double> y, double t_prev);

struct Recorder {
  Trajectory& traj;
  std::span<const Observer> observers;

  template <DynamicalSystem S>
  void record(const S& sys, double t, std::span<const double> y) {
    const Observables o = sys.observe(y);
    traj.times.push_back(t);
    traj.rho1.push_back(o.rho1);
    traj.rho2.push_back(o.rho2);
    traj.s.push_back(o.s);
    for (std::size_t k = 0; k < observers.size(); ++k) {
      traj.columns[k].second.push_back(observers[k].sample(t, y));
    }
  }
};

}  // namespace detail

/// One classical RK4 step of size dt, written into y in place.
template <DynamicalSystem S>
void rk4_step(const S& sys, std::vector<double>& y, double dt, std::vector<double>& work) {
  const std::size_t n = y.size();
  work.resize(5 * n);
  std::span<double> k1(work.data(), n), k2(work.data() + n, n), k3(work.data() + 2 * n, n),
      k4(work.data() + 3 * n, n), tmp(work.data() + 4 * n, n);
  sys.derivative(y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  sys.derivative(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  sys.derivative(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
  sys.derivative(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

/// Fixed-step RK4 from t = 0 to config.t_end. The last step is shortened
/// when t_end is not a multiple of dt.
template <DynamicalSystem S>
Trajectory integrate(const S& sys, std::vector<double> y, const IntegratorConfig& config,
                     std::span<const Observer> observers = {}, TrajectoryMeta meta = {}) {
  config.validate();
  if (y.size() != sys.dimension()) {
    std::ostringstream os;
    os << "initial state has " << y.size() << " entries, system expects " << sys.dimension();
    throw ShapeError(os.str());
  }
  detail::sanitize_state(y, 0.0);

  Trajectory traj;
  traj.meta = std::move(meta);
  for (const auto& obs : observers) traj.columns.emplace_back(obs.name, std::vector<double>{});
  detail::Recorder rec{traj, observers};

  std::vector<double> snap_times = config.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](double t) {
    while (next_snap < snap_times.size() && snap_times[next_snap] <= t + 1e-9 * config.dt) {
      traj.snapshots.push_back({t, y});
      ++next_snap;
    }
  };

  const auto steps = static_cast<std::size_t>(std::ceil(config.t_end / config.dt - 1e-9));
  rec.record(sys, 0.0, y);
  take_snapshots(0.0);

  std::vector<double> work;
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_next = (k == steps) ? config.t_end : static_cast<double>(k) * config.dt;
    rk4_step(sys, y, t_next - t, work);
    detail::sanitize_state(y, t);
    t = t_next;
    if (k % config.record_stride == 0 || k == steps) rec.record(sys, t, y);
    take_snapshots(t);
  }
  return traj;
}

// CSV writers. Numbers use 12 significant digits so identical runs produce
// byte-identical files.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_snapshot_csv(std::ostream& os, const Grid& grid, const Snapshot& snap);

}  // namespace clonal
