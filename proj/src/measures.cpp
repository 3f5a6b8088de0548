#include "clonal/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "clonal/dynamics.hpp"
#include "clonal/errors.hpp"

namespace clonal {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.position)) throw DomainError("atom position must be finite");
    if (!std::isfinite(a.weight) || a.weight < 0.0) {
      throw DomainError("atom weight must be finite and nonnegative");
    }
  }
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& l, const Atom& r) { return l.position < r.position; });
}

DiscreteMeasure DiscreteMeasure::dirac(double position, double weight) {
  return DiscreteMeasure({{position, weight}});
}

DiscreteMeasure DiscreteMeasure::from_density(std::span<const double> density, const Grid& grid) {
  if (density.size() != grid.size()) throw ShapeError("density does not match grid");
  const std::vector<double> w = grid.trapezoid_weights();
  std::vector<Atom> atoms(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) atoms[i] = {grid.node(i), density[i] * w[i]};
  return DiscreteMeasure(std::move(atoms));
}

double DiscreteMeasure::mass() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight;
  return m;
}

DiscreteMeasure DiscreteMeasure::scaled(double factor) const {
  if (!(factor >= 0.0)) throw DomainError("scale factor must be nonnegative");
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.weight *= factor;
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure DiscreteMeasure::shifted(double offset) const {
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.position += offset;
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure DiscreteMeasure::normalized() const {
  const double m = mass();
  if (!(m > 0.0)) throw PreconditionError("cannot normalize a zero-mass measure");
  return scaled(1.0 / m);
}

namespace {

struct SignedPoint {
  double x;
  double w;
};

// Sorted support of mu - nu; atoms at identical positions are combined.
std::vector<SignedPoint> merged_difference(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<SignedPoint> pts;
  pts.reserve(mu.atoms().size() + nu.atoms().size());
  for (const Atom& a : mu.atoms()) pts.push_back({a.position, a.weight});
  for (const Atom& a : nu.atoms()) pts.push_back({a.position, -a.weight});
  std::stable_sort(pts.begin(), pts.end(),
                   [](const SignedPoint& l, const SignedPoint& r) { return l.x < r.x; });
  std::vector<SignedPoint> out;
  for (const SignedPoint& p : pts) {
    if (!out.empty() && out.back().x == p.x) {
      out.back().w += p.w;
    } else {
      out.push_back(p);
    }
  }
  return out;
}

struct Vertex {
  double psi;
  double value;
};

// Value of the piecewise-linear function through `v` at psi (v sorted, psi
// inside its range).
double interpolate(const std::vector<Vertex>& v, double psi) {
  auto it = std::lower_bound(v.begin(), v.end(), psi,
                             [](const Vertex& a, double x) { return a.psi < x; });
  if (it == v.begin()) return it->value;
  if (it == v.end()) return v.back().value;
  const Vertex& r = *it;
  const Vertex& l = *(it - 1);
  if (r.psi == l.psi) return r.value;
  const double t = (psi - l.psi) / (r.psi - l.psi);
  return l.value + t * (r.value - l.value);
}

// Restricts a vertex list covering a superset of [-1, 1] to exactly [-1, 1].
std::vector<Vertex> clip_unit(const std::vector<Vertex>& v) {
  std::vector<Vertex> out;
  out.reserve(v.size() + 2);
  out.push_back({-1.0, interpolate(v, -1.0)});
  for (const Vertex& p : v) {
    if (p.psi > -1.0 && p.psi < 1.0 && p.psi > out.back().psi) out.push_back(p);
  }
  out.push_back({1.0, interpolate(v, 1.0)});
  return out;
}

}  // namespace

double flat_metric(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const std::vector<SignedPoint> pts = merged_difference(mu, nu);
  if (pts.empty()) return 0.0;

  // value(psi) = best partial objective over the first i points given psi_i = psi.
  std::vector<Vertex> value{{-1.0, -pts[0].w}, {1.0, pts[0].w}};
  std::vector<Vertex> widened;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double gap = pts[i].x - pts[i - 1].x;
    const auto top = std::max_element(value.begin(), value.end(),
                                      [](const Vertex& a, const Vertex& b) {
                                        return a.value < b.value;
                                      });
    // Maximising over |psi' - psi| <= gap stretches the maximum into a
    // plateau of width 2 * gap and shifts each flank outward by gap.
    widened.clear();
    for (auto it = value.begin(); it != top; ++it) widened.push_back({it->psi - gap, it->value});
    widened.push_back({top->psi - gap, top->value});
    widened.push_back({top->psi + gap, top->value});
    for (auto it = top + 1; it != value.end(); ++it) widened.push_back({it->psi + gap, it->value});

    value = clip_unit(widened);
    for (Vertex& v : value) v.value += pts[i].w * v.psi;
  }
  double best = value.front().value;
  for (const Vertex& v : value) best = std::max(best, v.value);
  return std::max(best, 0.0);
}

double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double m_mu = mu.mass();
  const double m_nu = nu.mass();
  if (std::abs(m_mu - 1.0) > 1e-12 || std::abs(m_nu - 1.0) > 1e-12) {
    std::ostringstream os;
    os << std::setprecision(17) << "wasserstein1 needs probability measures; masses are " << m_mu
       << " and " << m_nu;
    throw PreconditionError(os.str());
  }
  const std::vector<SignedPoint> pts = merged_difference(mu, nu);
  double cdf_gap = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    cdf_gap += pts[i].w;
    total += std::abs(cdf_gap) * (pts[i + 1].x - pts[i].x);
  }
  return total;
}

double flat_upper_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double m_mu = mu.mass();
  const double m_nu = nu.mass();
  const double mass_gap = std::abs(m_mu - m_nu);
  if (!(m_mu > 0.0) || !(m_nu > 0.0)) return mass_gap;
  return std::min(m_mu, m_nu) * wasserstein1(mu.normalized(), nu.normalized()) + mass_gap;
}

double mollifier_kernel(double x, double epsilon) {
  const double z = x / epsilon;
  if (std::abs(z) >= 1.0) return 0.0;
  const double b = 1.0 - z * z;
  return 15.0 / (16.0 * epsilon) * b * b;
}

std::vector<double> mollify(const DiscreteMeasure& mu, double epsilon, const Grid& grid) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("mollifier width must be positive");
  }
  if (grid.spacing() > 0.25 * epsilon * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "grid spacing " << grid.spacing() << " does not resolve mollifier width " << epsilon
       << " (need spacing <= epsilon / 4)";
    throw ResolutionError(os.str());
  }
  std::vector<double> density(grid.size(), 0.0);
  const double target = mu.mass();
  if (target == 0.0) return density;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i);
    for (const Atom& a : mu.atoms()) density[i] += a.weight * mollifier_kernel(x - a.position, epsilon);
  }
  const double sampled = total_mass(density, grid);
  if (!(sampled > 0.0)) {
    throw PreconditionError("mollified measure has no mass on the grid (support outside domain)");
  }
  const double scale = target / sampled;
  for (double& v : density) v *= scale;
  return density;
}

namespace {

// Integral over [a, b] of the piecewise-linear interpolant of the nodal values.
double integrate_interpolant(std::span<const double> f, const Grid& grid, double a, double b) {
  const double h = grid.spacing();
  const std::size_t n = grid.size();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double xl = grid.node(i);
    const double xr = grid.node(i + 1);
    const double lo = std::max(a, xl);
    const double hi = std::min(b, xr);
    if (hi <= lo) continue;
    const double fl = f[i] + (f[i + 1] - f[i]) * (lo - xl) / h;
    const double fr = f[i] + (f[i + 1] - f[i]) * (hi - xl) / h;
    total += 0.5 * (hi - lo) * (fl + fr);
  }
  return total;
}

}  // namespace

double concentration_stats(std::span<const double> density, const Grid& grid,
                           std::span<const std::size_t> center_indices, double window) {
  if (!(window > 0.0)) throw PreconditionError("concentration window must be positive");
  if (center_indices.empty()) throw PreconditionError("no concentration centers given");
  const double total = total_mass(density, grid);
  if (!(total > 0.0)) throw UndefinedFractionError("concentration fraction of a zero-mass density");

  std::vector<std::pair<double, double>> spans;
  for (std::size_t c : center_indices) {
    if (c >= grid.size()) throw ShapeError("center index outside the grid");
    const double x = grid.node(c);
    spans.emplace_back(std::max(grid.x_lo(), x - window), std::min(grid.x_hi(), x + window));
  }
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, s.second);
    } else {
      merged.push_back(s);
    }
  }
  double inside = 0.0;
  for (const auto& [lo, hi] : merged) inside += integrate_interpolant(density, grid, lo, hi);
  return std::clamp(inside / total, 0.0, 1.0);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError(where + ": not a number: '" + t + "'");
  }
  return v;
}

}  // namespace

DiscreteMeasure read_measure_csv(std::istream& is, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<Atom> atoms;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (!header_seen) {
      if (t != "position,weight") {
        throw ConfigError(where + ": expected header 'position,weight', got '" + t + "'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw ConfigError(where + ": expected two comma-separated fields");
    }
    const double x = parse_number(t.substr(0, comma), where);
    const double w = parse_number(t.substr(comma + 1), where);
    if (!std::isfinite(x) || !std::isfinite(w) || w < 0.0) {
      throw ConfigError(where + ": position must be finite and weight finite and >= 0");
    }
    atoms.push_back({x, w});
  }
  if (!header_seen) throw ConfigError(source + ": empty measure file");
  return DiscreteMeasure(std::move(atoms));
}

void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu) {
  const auto prec = os.precision(17);
  os << "position,weight\n";
  for (const Atom& a : mu.atoms()) os << a.position << ',' << a.weight << '\n';
  os.precision(prec);
}

void write_density_csv(std::ostream& os, const Grid& grid, std::span<const double> density) {
  if (density.size() != grid.size()) throw ShapeError("density does not match grid");
  const auto prec = os.precision(12);
  os << "x,u\n";
  for (std::size_t i = 0; i < grid.size(); ++i) os << grid.node(i) << ',' << density[i] << '\n';
  os.precision(prec);
}

}  // namespace clonal
