#include "clonal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <ostream>
#include <random>
#include <sstream>

#include "clonal/analysis.hpp"
#include "clonal/dynamics.hpp"
#include "clonal/errors.hpp"
#include "clonal/measures.hpp"

namespace clonal {

namespace {

constexpr std::size_t kMaxListed = 5;

class Checker {
 public:
  explicit Checker(std::string name) { rep_.name = std::move(name); }

  void next_case() { ++rep_.cases; }

  void check(bool ok, const std::function<std::string()>& what) {
    ++rep_.checks;
    if (ok) return;
    ++rep_.failures;
    if (rep_.first_failures.size() < kMaxListed) {
      rep_.first_failures.push_back("case " + std::to_string(rep_.cases) + ": " + what());
    }
  }

  // Exceptions inside a case count as one failure and end the case.
  void guarded(const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(false, [&] { return std::string("exception: ") + e.what(); });
    }
  }

  SuiteReport take() { return std::move(rep_); }

 private:
  SuiteReport rep_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Up to six atoms on the lattice k/128 in [0, 4], weights in (0, 2].
DiscreteMeasure random_measure(std::mt19937_64& rng) {
  const int n = std::uniform_int_distribution<int>(1, 6)(rng);
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) {
    const double x = std::uniform_int_distribution<int>(0, 512)(rng) / 128.0;
    atoms.push_back({x, uniform(rng, 0.01, 2.0)});
  }
  return DiscreteMeasure(std::move(atoms));
}

// Merged atoms at equal positions, for comparing measures as measures.
std::vector<Atom> canonical(const DiscreteMeasure& m) {
  std::vector<Atom> out;
  for (const auto& a : m.atoms()) {
    if (!out.empty() && out.back().position == a.position) {
      out.back().weight += a.weight;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

SuiteReport metrics_suite(std::uint64_t seed) {
  Checker ck("metrics");
  std::mt19937_64 rng(seed);
  for (double h : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    ck.next_case();
    const double v = flat_metric(DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(h));
    ck.check(std::abs(v - std::min(h, 2.0)) <= 1e-9,
             [&] { return "flat(d0, d" + fmt(h) + ") = " + fmt(v); });
  }
  for (int i = 0; i < 200; ++i) {
    ck.next_case();
    const DiscreteMeasure mu = random_measure(rng);
    const DiscreteMeasure nu = random_measure(rng);
    const DiscreteMeasure eta = random_measure(rng);
    ck.guarded([&] {
      const double d_mn = flat_metric(mu, nu);
      const double d_nm = flat_metric(nu, mu);
      const double d_me = flat_metric(mu, eta);
      const double d_en = flat_metric(eta, nu);
      ck.check(flat_metric(mu, mu) <= 1e-12, [&] { return std::string("d(mu, mu) != 0"); });
      ck.check(d_mn >= 0.0, [&] { return "negative distance " + fmt(d_mn); });
      ck.check(std::abs(d_mn - d_nm) <= 1e-9, [&] {
        return "asymmetric: " + fmt(d_mn) + " vs " + fmt(d_nm);
      });
      ck.check(d_mn <= d_me + d_en + 1e-9, [&] {
        return "triangle: " + fmt(d_mn) + " > " + fmt(d_me) + " + " + fmt(d_en);
      });
      const auto cm = canonical(mu);
      const auto cn = canonical(nu);
      const bool equal = cm.size() == cn.size() &&
                         std::equal(cm.begin(), cm.end(), cn.begin(), [](Atom a, Atom b) {
                           return a.position == b.position && a.weight == b.weight;
                         });
      ck.check(equal || d_mn > 0.0, [&] { return std::string("distinct measures at distance 0"); });

      const double theta = uniform(rng, 0.1, 10.0);
      const double scaled = flat_metric(mu.scaled(theta), nu.scaled(theta));
      ck.check(std::abs(scaled - theta * d_mn) <= 1e-9 * std::max(1.0, theta * d_mn), [&] {
        return "scale " + fmt(theta) + ": " + fmt(scaled) + " vs " + fmt(theta * d_mn);
      });
      const double shift = uniform(rng, -10.0, 10.0);
      const double shifted = flat_metric(mu.shifted(shift), nu.shifted(shift));
      ck.check(std::abs(shifted - d_mn) <= 1e-9, [&] {
        return "shift " + fmt(shift) + ": " + fmt(shifted) + " vs " + fmt(d_mn);
      });
      const double ub = flat_upper_bound(mu, nu);
      ck.check(d_mn <= ub + 1e-9, [&] { return "bound " + fmt(ub) + " < flat " + fmt(d_mn); });

      const DiscreteMeasure pm = mu.normalized();
      const DiscreteMeasure pn = nu.normalized();
      const double w = wasserstein1(pm, pn);
      const double f = flat_metric(pm, pn);
      ck.check(f <= w + 1e-9, [&] { return "flat " + fmt(f) + " > W1 " + fmt(w); });
    });
  }
  return ck.take();
}

// a(x) = floor + (peak - floor) exp(-z^2/2) with the peak on a grid node.
Profile random_bump(std::mt19937_64& rng, const Grid& grid) {
  const double peak = uniform(rng, 0.7, 0.95);
  const double floor = uniform(rng, 0.52, peak - 0.1);
  const std::size_t c =
      std::uniform_int_distribution<std::size_t>(grid.size() / 5, 4 * grid.size() / 5)(rng);
  const double width = uniform(rng, 0.03, 0.2);
  return Profile::single_bump(peak, floor, grid.node(c), width, grid.domain());
}

PopulationState random_initial(std::mt19937_64& rng, const Grid& grid) {
  const double c1 = uniform(rng, 10.0, 1000.0);
  const double b1 = uniform(rng, -0.9, 2.0);
  const double c2 = uniform(rng, 10.0, 1000.0);
  const double b2 = uniform(rng, 0.05, 2.0);
  PopulationState st;
  for (double x : grid.nodes()) {
    st.u1.push_back(c1 * (1.0 + b1 * x));
    st.u2.push_back(c2 * (b2 + x * x));
  }
  return st;
}

ModelParams random_params(std::mt19937_64& rng) {
  return {uniform(rng, 0.5, 2.0), uniform(rng, 0.1, 1.0), uniform(rng, 0.005, 0.05)};
}

SuiteReport bounds_suite(std::uint64_t seed) {
  Checker ck("bounds");
  std::mt19937_64 rng(seed);
  const Grid grid(0.0, 1.0, 51);
  for (int i = 0; i < 100; ++i) {
    ck.next_case();
    const ModelParams params = random_params(rng);
    const Profile profile = random_bump(rng, grid);
    const PopulationState st0 = random_initial(rng, grid);
    ck.guarded([&] {
      const BoundsCertificate cert = bounds_certificate(st0, profile, params, grid);
      const ContinuumSystem sys(params, profile, grid);
      IntegratorConfig cfg;
      cfg.dt = 0.01;
      cfg.t_end = 100.0;
      cfg.record_stride = 10;
      const BoundsReport rep = check_bounds(integrate(sys, sys.pack(st0), cfg), cert);
      ck.check(rep.passed(), [&] {
        const BoundViolation& v = rep.violations.front();
        return v.bound + " violated at t = " + fmt(v.t) + ": " + fmt(v.value) + " vs " +
               fmt(v.limit);
      });
    });
  }
  return ck.take();
}

SuiteReport lyapunov_suite(std::uint64_t seed) {
  Checker ck("lyapunov");
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 100; ++i) {
    ck.next_case();
    const double a = uniform(rng, 0.55, 0.95);
    const ModelParams params{uniform(rng, 0.5, 2.0), uniform(rng, 0.1, 1.0), 0.01};
    ck.guarded([&] {
      const EquilibriumPoint eq = steady_state(a, params);
      const double v1 = eq.rho1_bar * uniform(rng, 0.05, 5.0);
      const double v2 = eq.rho2_bar * uniform(rng, 0.05, 5.0);
      IntegratorConfig cfg;
      cfg.dt = 0.01;
      cfg.t_end = 500.0;
      const TwoCompartmentSystem sys(a, params);
      TrajectoryMeta meta{params, "constant", std::nullopt, a};
      const LyapunovReport rep = lyapunov_descent_check(integrate(sys, {v1, v2}, cfg, {}, meta), eq);
      ck.check(rep.passed, [&] {
        return "V increased by " + fmt(rep.max_increase) + " (a=" + fmt(a) + ")";
      });
      const double v0 = rep.values.front();
      const double vt = rep.values.back();
      ck.check(vt <= 1e-6 * v0, [&] {
        return "V(500) = " + fmt(vt) + " not below 1e-6 V(0) = " + fmt(1e-6 * v0);
      });
    });
  }
  return ck.take();
}

SuiteReport reduction_suite(std::uint64_t seed) {
  Checker ck("reduction");
  std::mt19937_64 rng(seed);
  const Grid grid(0.0, 1.0, 21);
  for (int i = 0; i < 20; ++i) {
    ck.next_case();
    const double a = uniform(rng, 0.55, 0.95);
    const ModelParams params = random_params(rng);
    const double u1 = uniform(rng, 1.0, 100.0);
    const double u2 = uniform(rng, 1.0, 100.0);
    ck.guarded([&] {
      IntegratorConfig cfg;
      cfg.dt = 0.01;
      cfg.t_end = 50.0;
      cfg.record_stride = 100;
      const ContinuumSystem cont(params, Profile::constant(a, grid.domain()), grid);
      const PopulationState st{0.0, std::vector<double>(grid.size(), u1),
                               std::vector<double>(grid.size(), u2)};
      const Trajectory tc = integrate(cont, cont.pack(st), cfg);
      const Trajectory t2 = integrate(TwoCompartmentSystem(a, params), {u1, u2}, cfg);
      for (std::size_t k = 0; k < tc.size(); ++k) {
        const double e1 = std::abs(tc.rho1[k] - t2.rho1[k]) / (1.0 + t2.rho1[k]);
        const double e2 = std::abs(tc.rho2[k] - t2.rho2[k]) / (1.0 + t2.rho2[k]);
        ck.check(e1 <= 1e-9 && e2 <= 1e-9, [&] {
          return "masses differ at t = " + fmt(tc.times[k]) + ": " + fmt(e1) + ", " + fmt(e2);
        });
      }

      // A healthy line alone is the two-compartment system.
      FiniteCloneState fs;
      fs.healthy_params = {a, params.p, params.d};
      fs.healthy = {u1, u2};
      fs.K_healthy = params.K;
      fs.K_leukemic = params.K;
      const FiniteCloneDerivative df = rhs_finite(fs);
      const auto [d1, d2] = rhs_two_compartment(u1, u2, a, params);
      ck.check(std::abs(df.healthy.proliferating - d1) <= 1e-12 * (1.0 + std::abs(d1)) &&
                   std::abs(df.healthy.mature - d2) <= 1e-12 * (1.0 + std::abs(d2)),
               [&] { return std::string("finite n = 0 derivative differs"); });
    });
  }
  return ck.take();
}

SuiteReport envelopes_suite(std::uint64_t seed) {
  Checker ck("envelopes");
  std::mt19937_64 rng(seed);
  const Grid grid(0.0, 1.0, 101);
  const ModelParams params{1.0, 0.2, 0.01};
  for (int i = 0; i < 10; ++i) {
    ck.next_case();
    const Profile profile = random_bump(rng, grid);
    const PopulationState st0 = random_initial(rng, grid);
    ck.guarded([&] {
      const BoundsCertificate cert = bounds_certificate(st0, profile, params, grid);
      const ContinuumSystem sys(params, profile, grid);
      const auto a = sys.self_renewal();
      const std::size_t top = argmax_set(profile, grid).front();

      // Decaying pairs against the maximiser, and mirror pairs around it.
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t j = 0; j < grid.size(); j += 7) {
        if (a[j] < a[top]) pairs.emplace_back(j, top);
      }
      std::vector<std::pair<std::size_t, std::size_t>> mirrors;
      for (std::size_t k = 1; k <= 10 && top >= k && top + k < grid.size(); ++k) {
        mirrors.emplace_back(top - k, top + k);
      }
      std::vector<RatioEnvelope> env;
      for (auto [j, m] : pairs) {
        env.push_back(decay_envelope(grid.node(j), grid.node(m), st0, grid, cert, params, profile));
      }

      IntegratorConfig cfg;
      cfg.dt = 0.01;
      cfg.t_end = 100.0;
      cfg.record_stride = 50;
      std::vector<Observer> obs;
      auto ratio_of = [&](std::size_t j, std::size_t m) {
        return [j, m](double, std::span<const double> y) { return y[j] / y[m]; };
      };
      for (auto [j, m] : pairs) obs.push_back({"r", ratio_of(j, m)});
      for (auto [j, m] : mirrors) obs.push_back({"m", ratio_of(j, m)});
      const Trajectory tr = integrate(sys, sys.pack(st0), cfg, obs);

      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& r = tr.columns[p].second;
        for (std::size_t k = 0; k < tr.size(); ++k) {
          const double e = env[p](tr.times[k]);
          ck.check(r[k] <= e * (1.0 + 1e-9), [&] {
            return "ratio " + fmt(r[k]) + " above envelope " + fmt(e) + " at t = " +
                   fmt(tr.times[k]);
          });
        }
      }
      for (std::size_t q = 0; q < mirrors.size(); ++q) {
        const auto& r = tr.columns[pairs.size() + q].second;
        // Mirror nodes share a(x) up to rounding of the node positions.
        const auto [j, m] = mirrors[q];
        if (std::abs(a[j] - a[m]) > 1e-12) continue;
        for (std::size_t k = 0; k < tr.size(); ++k) {
          ck.check(std::abs(r[k] / r[0] - 1.0) <= 1e-6, [&] {
            return "equal-a ratio drifted to " + fmt(r[k] / r[0]) + " at t = " + fmt(tr.times[k]);
          });
        }
      }
    });
  }
  return ck.take();
}

using SuiteFn = SuiteReport (*)(std::uint64_t);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r = {
      {"metrics", metrics_suite},     {"bounds", bounds_suite},
      {"lyapunov", lyapunov_suite},   {"reduction", reduction_suite},
      {"envelopes", envelopes_suite},
  };
  return r;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

SuiteReport run_suite(const std::string& name, std::uint64_t seed) {
  for (const auto& [n, fn] : registry()) {
    if (n == name) return fn(seed);
  }
  throw ConfigError("unknown verification suite '" + name + "'");
}

std::vector<SuiteReport> run_suites(const std::string& selector, std::uint64_t seed) {
  if (selector != "all") return {run_suite(selector, seed)};
  std::vector<std::future<SuiteReport>> jobs;
  for (const auto& [name, fn] : registry()) {
    jobs.push_back(std::async(std::launch::async, fn, seed));
  }
  std::vector<SuiteReport> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

void print_report(std::ostream& os, const SuiteReport& r) {
  os << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.cases << " cases, " << r.checks
     << " checks, " << r.failures << " failures\n";
  for (const auto& f : r.first_failures) os << "  " << f << '\n';
}

}  // namespace clonal
