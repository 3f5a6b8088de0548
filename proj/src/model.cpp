#include "clonal/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clonal/errors.hpp"

namespace clonal {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_open_unit_half(double v, const char* what) {
  if (!(v > 0.5 && v < 1.0)) {
    std::ostringstream os;
    os << what << " = " << v << " must lie in (1/2, 1)";
    throw DomainError(os.str());
  }
}

void require_domain(Interval d) {
  if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.hi > d.lo)) {
    throw DomainError("profile domain must be a finite interval with lo < hi");
  }
}

double bump(double x, double center, double width) {
  const double z = (x - center) / width;
  return std::exp(-0.5 * z * z);
}

// Linear interpolation on sorted xs; x is assumed inside [xs.front(), xs.back()].
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

}  // namespace

void ModelParams::validate() const {
  if (!positive_finite(p)) throw DomainError("p must be positive and finite");
  if (!positive_finite(d)) throw DomainError("d must be positive and finite");
  if (!positive_finite(K)) throw DomainError("K must be positive and finite");
}

bool Interval::contains(double x) const {
  const double slack = 1e-12 * std::max(1.0, hi - lo);
  return x >= lo - slack && x <= hi + slack;
}

Grid::Grid(double x_lo, double x_hi, std::size_t n_nodes) : x_lo_(x_lo), x_hi_(x_hi), n_(n_nodes) {
  if (n_nodes < 2) throw DomainError("grid needs at least 2 nodes");
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !(x_hi > x_lo)) {
    throw DomainError("grid endpoints must be finite with x_lo < x_hi");
  }
}

double Grid::node(std::size_t i) const {
  if (i + 1 == n_) return x_hi_;
  return x_lo_ + (x_hi_ - x_lo_) * static_cast<double>(i) / static_cast<double>(n_ - 1);
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = node(i);
  return xs;
}

std::vector<double> Grid::trapezoid_weights() const {
  std::vector<double> w(n_, spacing());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

bool operator==(const Grid& a, const Grid& b) {
  return a.x_lo() == b.x_lo() && a.x_hi() == b.x_hi() && a.size() == b.size();
}

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::single_bump: return "single-bump";
    case ProfileKind::two_bump: return "two-bump";
    case ProfileKind::piecewise_linear: return "piecewise-linear";
    case ProfileKind::tabulated: return "tabulated";
  }
  return "unknown";
}

Profile Profile::constant(double value, Interval domain) {
  require_domain(domain);
  require_open_unit_half(value, "constant self-renewal");
  Profile prof(ProfileKind::constant, domain);
  prof.peaks_ = {value, value};
  prof.floor_ = value;
  return prof;
}

Profile Profile::single_bump(double peak, double floor, double center, double width,
                             Interval domain) {
  require_domain(domain);
  require_open_unit_half(peak, "peak");
  require_open_unit_half(floor, "floor");
  if (floor > peak) throw DomainError("floor must not exceed peak");
  if (!positive_finite(width)) throw DomainError("bump width must be positive");
  if (!domain.contains(center)) throw DomainError("bump center outside the domain");
  Profile prof(ProfileKind::single_bump, domain);
  prof.peaks_ = {peak, peak};
  prof.floor_ = floor;
  prof.centers_ = {center, center};
  prof.widths_ = {width, width};
  return prof;
}

Profile Profile::two_bump(std::array<double, 2> peaks, double floor,
                          std::array<double, 2> centers, std::array<double, 2> widths,
                          Interval domain) {
  require_domain(domain);
  require_open_unit_half(floor, "floor");
  for (int k = 0; k < 2; ++k) {
    require_open_unit_half(peaks[k], "peak");
    if (floor > peaks[k]) throw DomainError("floor must not exceed peak");
    if (!positive_finite(widths[k])) throw DomainError("bump width must be positive");
    if (!domain.contains(centers[k])) throw DomainError("bump center outside the domain");
  }
  Profile prof(ProfileKind::two_bump, domain);
  prof.peaks_ = peaks;
  prof.floor_ = floor;
  prof.centers_ = centers;
  prof.widths_ = widths;
  return prof;
}

Profile Profile::piecewise_linear(std::vector<double> xs, std::vector<double> values) {
  if (xs.size() < 2 || xs.size() != values.size()) {
    throw DomainError("piecewise-linear profile needs >= 2 breakpoints with matching values");
  }
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (!(xs[k] > xs[k - 1])) throw DomainError("breakpoints must be strictly increasing");
  }
  for (double v : values) require_open_unit_half(v, "profile value");
  Interval domain{xs.front(), xs.back()};
  require_domain(domain);
  Profile prof(ProfileKind::piecewise_linear, domain);
  prof.xs_ = std::move(xs);
  prof.values_ = std::move(values);
  return prof;
}

Profile Profile::tabulated(std::vector<double> values, Interval domain) {
  require_domain(domain);
  if (values.size() < 2) throw DomainError("tabulated profile needs >= 2 values");
  for (double v : values) require_open_unit_half(v, "profile value");
  Profile prof(ProfileKind::tabulated, domain);
  const Grid table(domain.lo, domain.hi, values.size());
  prof.xs_ = table.nodes();
  prof.values_ = std::move(values);
  return prof;
}

double Profile::raw(double x) const {
  switch (kind_) {
    case ProfileKind::constant:
      return floor_;
    case ProfileKind::single_bump:
      return floor_ + (peaks_[0] - floor_) * bump(x, centers_[0], widths_[0]);
    case ProfileKind::two_bump:
      return std::max(floor_ + (peaks_[0] - floor_) * bump(x, centers_[0], widths_[0]),
                      floor_ + (peaks_[1] - floor_) * bump(x, centers_[1], widths_[1]));
    case ProfileKind::piecewise_linear:
    case ProfileKind::tabulated:
      return interpolate(xs_, values_, x);
  }
  return floor_;
}

double Profile::operator()(double x) const {
  if (!domain_.contains(x)) {
    std::ostringstream os;
    os << "x = " << x << " outside profile domain [" << domain_.lo << ", " << domain_.hi << "]";
    throw DomainError(os.str());
  }
  return std::clamp(raw(x), 0.5 + kClamp, 1.0 - kClamp);
}

std::vector<double> Profile::sample(const Grid& grid) const {
  std::vector<double> a(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) a[i] = (*this)(grid.node(i));
  return a;
}

std::string Profile::id() const {
  std::ostringstream os;
  os << to_string(kind_);
  switch (kind_) {
    case ProfileKind::constant:
      os << "(a=" << floor_ << ")";
      break;
    case ProfileKind::single_bump:
      os << "(peak=" << peaks_[0] << ",floor=" << floor_ << ",center=" << centers_[0]
         << ",width=" << widths_[0] << ")";
      break;
    case ProfileKind::two_bump:
      os << "(peaks=" << peaks_[0] << "/" << peaks_[1] << ",floor=" << floor_
         << ",centers=" << centers_[0] << "/" << centers_[1] << ",widths=" << widths_[0] << "/"
         << widths_[1] << ")";
      break;
    case ProfileKind::piecewise_linear:
    case ProfileKind::tabulated:
      os << "(" << values_.size() << " nodes)";
      break;
  }
  return os.str();
}

std::vector<std::size_t> argmax_set(const Profile& profile, const Grid& grid, double tol) {
  if (!(tol >= 0.0)) throw DomainError("argmax tolerance must be >= 0");
  const std::vector<double> a = profile.sample(grid);
  const double top = *std::max_element(a.begin(), a.end());
  const double cut = (1.0 - tol) * top;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= cut) idx.push_back(i);
  }
  return idx;
}

double signal(double rho2, const ModelParams& params) {
  if (!(rho2 >= 0.0)) throw DomainError("rho2 must be nonnegative");
  return 1.0 / (1.0 + params.K * rho2);
}

void PopulationState::validate(const Grid& grid) const {
  if (u1.size() != grid.size() || u2.size() != grid.size()) {
    std::ostringstream os;
    os << "state vectors have lengths " << u1.size() << "/" << u2.size() << ", grid has "
       << grid.size() << " nodes";
    throw ShapeError(os.str());
  }
  for (const auto* v : {&u1, &u2}) {
    for (double x : *v) {
      if (!std::isfinite(x) || x < 0.0) {
        throw DomainError("population densities must be finite and nonnegative");
      }
    }
  }
}

void FiniteCloneState::validate() const {
  if (clone_params.size() != clones.size()) {
    throw ShapeError("clone parameter and population counts differ");
  }
  auto check_params = [](const CloneParams& c) {
    if (!(c.a > 0.0 && c.a < 1.0)) throw DomainError("self-renewal fraction must be in (0, 1)");
    if (!positive_finite(c.p) || !positive_finite(c.d2)) {
      throw DomainError("clone rates must be positive");
    }
  };
  auto check_pop = [](const ClonePopulation& c) {
    if (!(c.proliferating >= 0.0) || !(c.mature >= 0.0) || !std::isfinite(c.proliferating) ||
        !std::isfinite(c.mature)) {
      throw DomainError("populations must be finite and nonnegative");
    }
  };
  check_params(healthy_params);
  check_pop(healthy);
  for (const auto& c : clone_params) check_params(c);
  for (const auto& c : clones) check_pop(c);
  if (!positive_finite(K_healthy) || !positive_finite(K_leukemic)) {
    throw DomainError("feedback coefficients must be positive");
  }
}

double FiniteCloneState::signal() const {
  double leukemic = 0.0;
  for (const auto& c : clones) leukemic += c.mature;
  return 1.0 / (1.0 + K_healthy * healthy.mature + K_leukemic * leukemic);
}

}  // namespace clonal
