#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace clonal {

/// Rate constants shared by every model variant.
///
/// `p` is the proliferation rate, `d` the clearance rate of mature cells and
/// `K` the feedback coefficient in s = 1 / (1 + K * rho2).
struct ModelParams {
  double p = 1.0;
  double d = 0.2;
  double K = 0.01;

  // Throws DomainError unless all three are finite and positive.
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double x) const;
};

/// Uniform node set on [x_lo, x_hi]. Node i sits at
/// x_lo + (x_hi - x_lo) * i / (n - 1), so the last node is exactly x_hi.
class Grid {
 public:
  Grid(double x_lo, double x_hi, std::size_t n_nodes);

  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  std::size_t size() const { return n_; }
  double spacing() const { return (x_hi_ - x_lo_) / static_cast<double>(n_ - 1); }
  double node(std::size_t i) const;
  std::vector<double> nodes() const;
  Interval domain() const { return {x_lo_, x_hi_}; }

  // Composite trapezoid weights (h/2 at the ends, h inside).
  std::vector<double> trapezoid_weights() const;

 private:
  double x_lo_;
  double x_hi_;
  std::size_t n_;
};

bool operator==(const Grid& a, const Grid& b);

enum class ProfileKind { constant, single_bump, two_bump, piecewise_linear, tabulated };

const char* to_string(ProfileKind kind);

/// Self-renewal fraction a(x) on a closed interval.
///
/// Every family keeps its values inside (1/2, 1). Shape parameters are
/// validated on construction; evaluation clamps round-off into
/// [1/2 + kClamp, 1 - kClamp] so that 2a - 1 and 1 - a never reach zero.
class Profile {
 public:
  static constexpr double kClamp = 1e-9;

  static Profile constant(double value, Interval domain = {});

  /// floor + (peak - floor) * exp(-(x - center)^2 / (2 width^2))
  static Profile single_bump(double peak, double floor, double center, double width,
                             Interval domain = {});

  /// Pointwise maximum of two bumps over a common floor.
  static Profile two_bump(std::array<double, 2> peaks, double floor,
                          std::array<double, 2> centers, std::array<double, 2> widths,
                          Interval domain = {});

  /// Linear interpolation through (xs[k], values[k]); the domain is
  /// [xs.front(), xs.back()].
  static Profile piecewise_linear(std::vector<double> xs, std::vector<double> values);

  /// Values at uniformly spaced table nodes spanning `domain`, linearly
  /// interpolated in between.
  static Profile tabulated(std::vector<double> values, Interval domain = {});

  double operator()(double x) const;
  std::vector<double> sample(const Grid& grid) const;

  ProfileKind kind() const { return kind_; }
  Interval domain() const { return domain_; }
  std::string id() const;

 private:
  Profile(ProfileKind kind, Interval domain) : kind_(kind), domain_(domain) {}

  double raw(double x) const;

  ProfileKind kind_;
  Interval domain_;
  // Shape parameters; meaning depends on kind_.
  std::array<double, 2> peaks_{};
  std::array<double, 2> centers_{};
  std::array<double, 2> widths_{};
  double floor_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> values_;
};

/// Indices i with a(x_i) >= (1 - tol) * max_j a(x_j). Never empty.
std::vector<std::size_t> argmax_set(const Profile& profile, const Grid& grid, double tol = 0.0);

/// Feedback signal 1 / (1 + K * rho2).
double signal(double rho2, const ModelParams& params);

/// Time-stamped densities of the continuum system on a grid.
struct PopulationState {
  double t = 0.0;
  std::vector<double> u1;
  std::vector<double> u2;

  // Throws ShapeError on length mismatch and DomainError on negative or
  // non-finite entries.
  void validate(const Grid& grid) const;
};

struct CloneParams {
  double a = 0.8;
  double p = 1.0;
  double d2 = 0.2;
};

struct ClonePopulation {
  double proliferating = 0.0;
  double mature = 0.0;
};

/// Healthy line plus n leukemic clones, each with a proliferating and a
/// mature compartment. The healthy mature cells enter the signal with
/// weight K_healthy, all leukemic mature cells with K_leukemic.
struct FiniteCloneState {
  CloneParams healthy_params;
  ClonePopulation healthy;
  std::vector<CloneParams> clone_params;
  std::vector<ClonePopulation> clones;
  double K_healthy = 0.01;
  double K_leukemic = 0.01;

  void validate() const;
  double signal() const;
};

}  // namespace clonal
