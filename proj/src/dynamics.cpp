#include "clonal/dynamics.hpp"

#include <iomanip>
#include <ostream>

namespace clonal {

double total_mass(std::span<const double> density, const Grid& grid) {
  if (density.size() != grid.size()) {
    std::ostringstream os;
    os << "density has " << density.size() << " entries, grid has " << grid.size();
    throw ShapeError(os.str());
  }
  const std::size_t n = density.size();
  double inner = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) inner += density[i];
  return grid.spacing() * (inner + 0.5 * (density.front() + density.back()));
}

DensityPair rhs_continuum(const PopulationState& state, const ModelParams& params,
                          const Profile& profile, const Grid& grid) {
  state.validate(grid);
  const ContinuumSystem sys(params, profile, grid);
  const std::vector<double> y = sys.pack(state);
  std::vector<double> dy(y.size());
  sys.derivative(y, dy);
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  return {std::vector<double>(dy.begin(), dy.begin() + n),
          std::vector<double>(dy.begin() + n, dy.end())};
}

FiniteCloneDerivative rhs_finite(const FiniteCloneState& state) {
  state.validate();
  const double s = state.signal();
  auto line = [s](const CloneParams& c, const ClonePopulation& pop) {
    return ClonePopulation{(2.0 * c.a * s - 1.0) * c.p * pop.proliferating,
                           2.0 * (1.0 - c.a * s) * c.p * pop.proliferating - c.d2 * pop.mature};
  };
  FiniteCloneDerivative out;
  out.healthy = line(state.healthy_params, state.healthy);
  out.clones.reserve(state.clones.size());
  for (std::size_t i = 0; i < state.clones.size(); ++i) {
    out.clones.push_back(line(state.clone_params[i], state.clones[i]));
  }
  return out;
}

std::pair<double, double> rhs_two_compartment(double v1, double v2, double a,
                                              const ModelParams& params) {
  const double q = a / (1.0 + params.K * v2);
  return {(2.0 * q - 1.0) * params.p * v1, 2.0 * (1.0 - q) * params.p * v1 - params.d * v2};
}

// ---------------------------------------------------------------------------

ContinuumSystem::ContinuumSystem(ModelParams params, const Profile& profile, Grid grid)
    : params_(params), grid_(grid), a_(profile.sample(grid)), w_(grid.trapezoid_weights()) {
  params_.validate();
}

void ContinuumSystem::derivative(std::span<const double> y, std::span<double> dy) const {
  const std::size_t n = grid_.size();
  const auto u1 = y.first(n);
  const auto u2 = y.subspan(n, n);
  double rho2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) rho2 += w_[i] * u2[i];
  const double s = 1.0 / (1.0 + params_.K * rho2);
  const double p = params_.p;
  const double d = params_.d;
  for (std::size_t i = 0; i < n; ++i) {
    const double as = a_[i] * s;
    dy[i] = (2.0 * as - 1.0) * p * u1[i];
    dy[n + i] = 2.0 * (1.0 - as) * p * u1[i] - d * u2[i];
  }
}

Observables ContinuumSystem::observe(std::span<const double> y) const {
  const std::size_t n = grid_.size();
  Observables o;
  o.rho1 = total_mass(y.first(n), grid_);
  o.rho2 = total_mass(y.subspan(n, n), grid_);
  o.s = 1.0 / (1.0 + params_.K * o.rho2);
  return o;
}

std::vector<double> ContinuumSystem::pack(const PopulationState& state) const {
  state.validate(grid_);
  std::vector<double> y(state.u1);
  y.insert(y.end(), state.u2.begin(), state.u2.end());
  return y;
}

PopulationState ContinuumSystem::unpack(double t, std::span<const double> y) const {
  const std::size_t n = grid_.size();
  if (y.size() != 2 * n) throw ShapeError("continuum state has the wrong length");
  return {t, std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)),
          std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(n), y.end())};
}

TwoCompartmentSystem::TwoCompartmentSystem(double a, ModelParams params) : a_(a), params_(params) {
  params_.validate();
  if (!(a > 0.5 && a < 1.0)) throw DomainError("constant self-renewal must lie in (1/2, 1)");
}

void TwoCompartmentSystem::derivative(std::span<const double> y, std::span<double> dy) const {
  const auto [d1, d2] = rhs_two_compartment(y[0], y[1], a_, params_);
  dy[0] = d1;
  dy[1] = d2;
}

Observables TwoCompartmentSystem::observe(std::span<const double> y) const {
  return {y[0], y[1], 1.0 / (1.0 + params_.K * y[1])};
}

FiniteCloneSystem::FiniteCloneSystem(FiniteCloneState prototype) : prototype_(std::move(prototype)) {
  prototype_.validate();
}

void FiniteCloneSystem::derivative(std::span<const double> y, std::span<double> dy) const {
  const std::size_t n = prototype_.clones.size();
  double leukemic = 0.0;
  for (std::size_t i = 0; i < n; ++i) leukemic += y[2 * (i + 1) + 1];
  const double s = 1.0 / (1.0 + prototype_.K_healthy * y[1] + prototype_.K_leukemic * leukemic);
  auto line = [&](const CloneParams& c, std::size_t off) {
    dy[off] = (2.0 * c.a * s - 1.0) * c.p * y[off];
    dy[off + 1] = 2.0 * (1.0 - c.a * s) * c.p * y[off] - c.d2 * y[off + 1];
  };
  line(prototype_.healthy_params, 0);
  for (std::size_t i = 0; i < n; ++i) line(prototype_.clone_params[i], 2 * (i + 1));
}

Observables FiniteCloneSystem::observe(std::span<const double> y) const {
  Observables o;
  double leukemic = 0.0;
  for (std::size_t i = 0; i < y.size(); i += 2) {
    o.rho1 += y[i];
    o.rho2 += y[i + 1];
    if (i > 0) leukemic += y[i + 1];
  }
  o.s = 1.0 / (1.0 + prototype_.K_healthy * y[1] + prototype_.K_leukemic * leukemic);
  return o;
}

std::vector<double> FiniteCloneSystem::pack(const FiniteCloneState& state) const {
  state.validate();
  if (state.clones.size() != prototype_.clones.size()) {
    throw ShapeError("clone count differs from the system");
  }
  std::vector<double> y{state.healthy.proliferating, state.healthy.mature};
  for (const auto& c : state.clones) {
    y.push_back(c.proliferating);
    y.push_back(c.mature);
  }
  return y;
}

FiniteCloneState FiniteCloneSystem::unpack(std::span<const double> y) const {
  if (y.size() != dimension()) throw ShapeError("finite-clone state has the wrong length");
  FiniteCloneState out = prototype_;
  out.healthy = {y[0], y[1]};
  for (std::size_t i = 0; i < out.clones.size(); ++i) {
    out.clones[i] = {y[2 * (i + 1)], y[2 * (i + 1) + 1]};
  }
  return out;
}

// ---------------------------------------------------------------------------

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive");
  if (dt > t_end) throw DomainError("dt must not exceed t_end");
  if (record_stride == 0) throw DomainError("record_stride must be >= 1");
}

const std::vector<double>* Trajectory::find_column(const std::string& name) const {
  for (const auto& [key, values] : columns) {
    if (key == name) return &values;
  }
  return nullptr;
}

const std::vector<double>& Trajectory::column(const std::string& name) const {
  if (const auto* c = find_column(name)) return *c;
  throw PreconditionError("trajectory has no column '" + name + "'");
}

namespace detail {

void sanitize_state(std::span<double> y, double t_prev) {
  for (double& v : y) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integration blew up (non-finite state); last valid time t = " << t_prev;
      throw BlowupError(os.str(), t_prev);
    }
    if (v < 0.0) {
      if (v < -kClampTolerance) {
        std::ostringstream os;
        os << "state undershot zero (" << v << ") after t = " << t_prev
           << "; reduce the step size dt";
        throw NegativityError(os.str(), t_prev);
      }
      v = 0.0;
    }
  }
}

}  // namespace detail

namespace {

class CsvPrecision {
 public:
  explicit CsvPrecision(std::ostream& os) : os_(os), flags_(os.flags()), prec_(os.precision()) {
    os_ << std::setprecision(12);
    os_.unsetf(std::ios::floatfield);
  }
  ~CsvPrecision() {
    os_.flags(flags_);
    os_.precision(prec_);
  }

 private:
  std::ostream& os_;
  std::ios::fmtflags flags_;
  std::streamsize prec_;
};

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  CsvPrecision guard(os);
  os << "t,rho1,rho2,s";
  for (const auto& [name, _] : traj.columns) os << ',' << name;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << traj.times[k] << ',' << traj.rho1[k] << ',' << traj.rho2[k] << ',' << traj.s[k];
    for (const auto& [_, values] : traj.columns) os << ',' << values[k];
    os << '\n';
  }
}

void write_snapshot_csv(std::ostream& os, const Grid& grid, const Snapshot& snap) {
  const std::size_t n = grid.size();
  if (snap.state.size() != 2 * n) throw ShapeError("snapshot does not match grid");
  CsvPrecision guard(os);
  os << "x,u1,u2\n";
  for (std::size_t i = 0; i < n; ++i) {
    os << grid.node(i) << ',' << snap.state[i] << ',' << snap.state[n + i] << '\n';
  }
}

}  // namespace clonal
