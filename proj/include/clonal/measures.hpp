#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clonal/model.hpp"

namespace clonal {

struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

/// Finite positive measure on the real line, stored as weighted atoms.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms);

  static DiscreteMeasure dirac(double position, double weight = 1.0);

  /// Atoms at the grid nodes carrying the trapezoid weight of the density,
  /// so mass() agrees with total_mass(density, grid).
  static DiscreteMeasure from_density(std::span<const double> density, const Grid& grid);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  double mass() const;

  DiscreteMeasure scaled(double factor) const;
  DiscreteMeasure shifted(double offset) const;
  DiscreteMeasure normalized() const;

 private:
  std::vector<Atom> atoms_;
};

/// Bounded-Lipschitz (flat) distance: the supremum of the integral of psi
/// against mu - nu over test functions with |psi| <= 1 and Lip(psi) <= 1.
///
/// On the sorted merged support this is the linear program
///   max sum_i psi_i w_i  s.t.  |psi_i| <= 1,  |psi_{i+1} - psi_i| <= x_{i+1} - x_i.
/// The constraint matrix is a chain, so the program is solved exactly by
/// sweeping the concave piecewise-linear value function left to right.
double flat_metric(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Wasserstein-1 distance of two probability measures (L1 distance of the
/// distribution functions). Throws PreconditionError unless both masses
/// equal 1 within 1e-12.
double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// min(m_mu, m_nu) * W1(mu/m_mu, nu/m_nu) + |m_mu - m_nu|. Reduces to the
/// mass difference when either measure is empty.
double flat_upper_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Compactly supported C1 bump (1 - (x/eps)^2)^2 on |x| < eps, scaled to
/// unit integral.
double mollifier_kernel(double x, double epsilon);

/// Density of mu convolved with the mollifier, sampled at the grid nodes and
/// rescaled so that total_mass(result) == mu.mass(). Requires
/// spacing <= epsilon / 4.
std::vector<double> mollify(const DiscreteMeasure& mu, double epsilon, const Grid& grid);

/// Fraction of the mass of the piecewise-linear interpolant of `density`
/// lying within `window` of any center node.
double concentration_stats(std::span<const double> density, const Grid& grid,
                           std::span<const std::size_t> center_indices, double window);

// CSV: header "position,weight", one atom per line.
DiscreteMeasure read_measure_csv(std::istream& is, const std::string& source = "<stream>");
void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu);
// CSV: header "x,u".
void write_density_csv(std::ostream& os, const Grid& grid, std::span<const double> density);

}  // namespace clonal
