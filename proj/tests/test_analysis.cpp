#include <cmath>

#include "doctest.h"

#include "clonal/analysis.hpp"
#include "clonal/errors.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace clonal;

namespace {

const ModelParams kFig{1.0, 0.2, 0.01};

std::vector<double> on_grid(const Grid& g, double (*f)(double)) {
  std::vector<double> v;
  for (double x : g.nodes()) v.push_back(f(x));
  return v;
}

PopulationState fig1_initial(const Grid& g) {
  return {0.0, on_grid(g, [](double x) { return 1000 - 500 * x; }),
          on_grid(g, [](double x) { return 1000 * x * x; })};
}

Trajectory two_compartment_run(double a, const ModelParams& p, double v1, double v2, double t_end) {
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = t_end;
  TrajectoryMeta meta{p, "constant", std::nullopt, a};
  return integrate(TwoCompartmentSystem(a, p), {v1, v2}, cfg, {}, meta);
}

}  // namespace

TEST_CASE("steady state examples") {
  const EquilibriumPoint eq = steady_state(0.9, kFig);
  CHECK(eq.rho1_bar == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(eq.rho2_bar == doctest::Approx(80.0).epsilon(1e-14));
  CHECK(equilibrium_residual(eq, kFig) < 1e-12);

  const EquilibriumPoint e2 = steady_state(0.75, {2.0, 1.0, 1.0});
  CHECK(e2.rho1_bar == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(e2.rho2_bar == doctest::Approx(0.5).epsilon(1e-15));

  const EquilibriumPoint near = steady_state(0.5 + 1e-10, kFig);
  CHECK(near.rho1_bar < 1e-7);
  CHECK(near.rho2_bar < 1e-7);
  CHECK(near.rho2_bar > 0.0);

  CHECK_THROWS_AS(steady_state(0.5, kFig), DomainError);
  CHECK_THROWS_AS(steady_state(0.4, kFig), DomainError);
  CHECK_THROWS_AS(steady_state(1.0, kFig), DomainError);
}

TEST_CASE("property: steady-state residual") {
  gen::Rng rng(61);
  for (int i = 0; i < 500; ++i) {
    const ModelParams p = gen::params(rng);
    const EquilibriumPoint eq = steady_state(rng.uniform(0.5001, 0.9999), p);
    CHECK(equilibrium_residual(eq, p) < 1e-12);
    CHECK(eq.rho1_bar > 0.0);
    CHECK(signal(eq.rho2_bar, p) == doctest::Approx(1.0 / (2.0 * eq.a_bar)).epsilon(1e-13));
  }
}

TEST_CASE("lyapunov function values") {
  const EquilibriumPoint eq = steady_state(0.9, kFig);
  CHECK(lyapunov_g(eq.rho2_bar, 0.9, 0.01) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(lyapunov(16.0, 80.0, eq, kFig)) < 1e-15);
  CHECK(lyapunov(32.0, 80.0, eq, kFig) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));

  const ModelParams p2{2.0, 1.0, 1.0};
  const EquilibriumPoint e2 = steady_state(0.75, p2);
  CHECK(lyapunov(2 * e2.rho1_bar, e2.rho2_bar, e2, p2) ==
        doctest::Approx((1.0 - std::log(2.0)) / 2.0).epsilon(1e-14));

  CHECK_THROWS_AS(lyapunov(0.0, 1.0, eq, kFig), DomainError);
  CHECK_THROWS_AS(lyapunov(1.0, -1.0, eq, kFig), DomainError);
  CHECK(std::isfinite(lyapunov(1.0, 0.0, eq, kFig)));
}

TEST_CASE("property: closed-form integral matches quadrature") {
  gen::Rng rng(67);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(0.51, 0.99);
    const ModelParams p{rng.uniform(0.5, 2.0), rng.uniform(0.1, 1.0), rng.uniform(0.001, 1.0)};
    const EquilibriumPoint eq = steady_state(a, p);
    const double v2 = eq.rho2_bar * rng.uniform(0.0, 5.0);
    const double g_bar = lyapunov_g(eq.rho2_bar, a, p.K);
    const double ref = oracle::integrate(
        [&](double xi) { return g_bar / (2.0 * (1.0 - a / (1.0 + p.K * xi))); }, eq.rho2_bar, v2);
    CHECK(std::abs(lyapunov_g_integral(v2, eq, p) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("property: lyapunov is nonnegative and vanishes only at the equilibrium") {
  gen::Rng rng(71);
  for (int i = 0; i < 500; ++i) {
    const ModelParams p = gen::params(rng);
    const EquilibriumPoint eq = steady_state(rng.uniform(0.55, 0.95), p);
    const double v1 = eq.rho1_bar * rng.uniform(1e-3, 10.0);
    const double v2 = eq.rho2_bar * rng.uniform(0.0, 10.0);
    const double v = lyapunov(v1, v2, eq, p);
    CHECK(v >= 0.0);
    if (std::abs(v1 / eq.rho1_bar - 1) > 1e-3 || std::abs(v2 / eq.rho2_bar - 1) > 1e-3) {
      CHECK(v > 0.0);
    }
    CHECK(std::abs(lyapunov(eq.rho1_bar, eq.rho2_bar, eq, p)) < 1e-12);
  }
}

TEST_CASE("lyapunov descent check") {
  const EquilibriumPoint eq = steady_state(0.9, kFig);
  SUBCASE("from the equilibrium") {
    const LyapunovReport rep = lyapunov_descent_check(two_compartment_run(0.9, kFig, 16, 80, 5), eq);
    CHECK(rep.passed);
    for (double v : rep.values) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("from (2 rho1_bar, rho2_bar)") {
    const LyapunovReport rep =
        lyapunov_descent_check(two_compartment_run(0.9, kFig, 32, 80, 300), eq);
    CHECK(rep.passed);
    CHECK(rep.values.front() == doctest::Approx(1.0 - std::log(2.0)));
    for (std::size_t k = 1; k < rep.values.size(); ++k) CHECK(rep.values[k] < rep.values[k - 1]);
    CHECK(rep.values.back() < 1e-6);
  }
  SUBCASE("configuration mismatch") {
    CHECK_THROWS_AS(lyapunov_descent_check(two_compartment_run(0.8, kFig, 16, 80, 1), eq),
                    ConfigError);
    Trajectory bare = two_compartment_run(0.9, kFig, 16, 80, 1);
    bare.meta.constant_a.reset();
    CHECK_THROWS_AS(lyapunov_descent_check(bare, eq), ConfigError);
  }
}

TEST_CASE("bounds certificate formulas") {
  SUBCASE("quotient at most one") {
    const Grid g(0.0, 1.0, 11);
    const PopulationState st{0.0, std::vector<double>(11, 5.0), std::vector<double>(11, 10.0)};
    const BoundsCertificate c = bounds_certificate(st, Profile::constant(0.9), kFig, g);
    CHECK(c.M1 == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(c.M2 == doctest::Approx(800.0).epsilon(1e-14));
    CHECK(c.M3 == doctest::Approx(8000.0).epsilon(1e-14));
    CHECK(c.gamma == doctest::Approx(0.1));
    const double m4 = 2.0 * std::pow(800.0, 0.9) / (0.2 - 0.1);
    CHECK(c.M4 == doctest::Approx(std::max(10.0 / std::pow(5.0, 0.1), m4)).epsilon(1e-13));
    CHECK(c.M5 == doctest::Approx(std::min(5.0, std::pow(0.8 / (0.01 * c.M4), 10.0))).epsilon(1e-12));
    CHECK_FALSE(c.quotient_restricted);
  }
  SUBCASE("fig1 data restrict the quotient") {
    const Grid g(0.0, 1.0, 201);
    const BoundsCertificate c =
        bounds_certificate(fig1_initial(g), Profile::single_bump(0.9, 0.6, 0.3, 0.05), kFig, g);
    CHECK(c.quotient_restricted);
    CHECK(c.excluded_nodes == 1);
    CHECK(std::isfinite(c.M1));
    // Largest admissible quotient sits at the first interior node.
    const double x1 = g.node(1);
    CHECK(c.M1 == doctest::Approx((1000 - 500 * x1) / (1000 * x1 * x1)));
    CHECK(c.a_bar == doctest::Approx(0.9));
    CHECK(c.a_min > 0.5);
  }
  SUBCASE("gamma keeps gamma p < d") {
    gen::Rng rng(73);
    const Grid g(0.0, 1.0, 21);
    for (int i = 0; i < 100; ++i) {
      const ModelParams p{rng.uniform(0.01, 10.0), rng.uniform(0.01, 10.0), 0.01};
      const BoundsCertificate c = bounds_certificate(gen::initial(rng, g), gen::bump(rng, g), p, g);
      CHECK(c.gamma * p.p < p.d);
      CHECK(c.gamma > 0.0);
      CHECK(c.gamma < 1.0);
      for (double m : {c.M1, c.M2, c.M3, c.M4}) CHECK(m > 0.0);
      // The floor is a 1/gamma power and underflows when d/p is tiny.
      const double log_floor = std::log((2.0 * c.a_min - 1.0) / (p.K * c.M4)) / c.gamma;
      if (log_floor > -700.0) CHECK(c.M5 > 0.0);
      CHECK(c.M5 >= 0.0);
    }
  }
  SUBCASE("undefined certificates") {
    const Grid g(0.0, 1.0, 5);
    CHECK_THROWS_AS(bounds_certificate({0.0, std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)},
                                       Profile::constant(0.8), kFig, g),
                    PreconditionError);
    CHECK_THROWS_AS(bounds_certificate({0.0, std::vector<double>(5, 1.0), std::vector<double>(5, 0.0)},
                                       Profile::constant(0.8), kFig, g),
                    PreconditionError);
  }
}

TEST_CASE("check bounds") {
  BoundsCertificate c;
  c.M2 = 10;
  c.M3 = 100;
  c.M4 = 60;
  c.gamma = 0.5;
  c.M5 = 1;
  Trajectory tr;
  tr.times = {0, 1, 2, 3};
  tr.rho1 = {4, 4, 11, 0.5};
  tr.rho2 = {20, 101, 20, 20};
  tr.s = {1, 1, 1, 1};
  const BoundsReport rep = check_bounds(tr, c);
  CHECK_FALSE(rep.passed());
  REQUIRE(rep.violations.size() == 3);
  CHECK(rep.violations[0].bound == "M3");
  CHECK(rep.violations[0].t == 1.0);
  CHECK(rep.violations[1].bound == "M2");
  CHECK(rep.violations[2].bound == "M5");
  CHECK(*rep.first_violation_time == 1.0);
  tr.rho2 = {20, 99.9, 20, 20};
  tr.rho1 = {4, 4, 4, 4};
  c.M4 = 49;
  const BoundsReport r2 = check_bounds(tr, c);
  REQUIRE(r2.violations.size() == 1);
  CHECK(r2.violations[0].bound == "M4");
  CHECK(r2.samples == 4);

  nlohmann::json j = rep;
  CHECK(j["passed"] == false);
  CHECK(j["violations"].size() == 3);
}

TEST_CASE("bounds hold on the equilibrium and fig1 runs") {
  const Grid g(0.0, 1.0, 101);
  SUBCASE("uniform equilibrium") {
    const Profile a = Profile::constant(0.9);
    const PopulationState st{0.0, std::vector<double>(101, 16.0), std::vector<double>(101, 80.0)};
    const ContinuumSystem sys(kFig, a, g);
    IntegratorConfig cfg;
    cfg.t_end = 20;
    CHECK(check_bounds(integrate(sys, sys.pack(st), cfg), bounds_certificate(st, a, kFig, g))
              .passed());
  }
  SUBCASE("fig1 data") {
    const Profile a = Profile::single_bump(0.9, 0.6, 0.3, 0.05);
    const PopulationState st = fig1_initial(g);
    const ContinuumSystem sys(kFig, a, g);
    IntegratorConfig cfg;
    cfg.t_end = 100;
    const BoundsReport rep =
        check_bounds(integrate(sys, sys.pack(st), cfg), bounds_certificate(st, a, kFig, g));
    CHECK(rep.passed());
    CHECK(rep.samples == 10001);
  }
}

TEST_CASE("decay envelope") {
  const Grid g(0.0, 1.0, 101);
  const Profile a = Profile::single_bump(0.9, 0.6, 0.3, 0.05);
  const PopulationState st = fig1_initial(g);
  const BoundsCertificate c = bounds_certificate(st, a, kFig, g);
  const RatioEnvelope env = decay_envelope(0.8, 0.3, st, g, c, kFig, a);
  CHECK(env(0.0) == doctest::Approx(600.0 / 850.0).epsilon(1e-14));
  CHECK(env.rate == doctest::Approx(2.0 * (a(0.8) - 0.9) / (1.0 + 0.01 * c.M3)));
  CHECK(env(10.0) < env(0.0));
  // Between nodes the initial data are interpolated linearly.
  CHECK(decay_envelope(0.805, 0.3, st, g, c, kFig, a).initial_ratio ==
        doctest::Approx((1000 - 500 * 0.805) / 850.0));
  CHECK_THROWS_AS(decay_envelope(0.3, 0.8, st, g, c, kFig, a), PreconditionError);
  CHECK_THROWS_AS(decay_envelope(0.3, 0.3, st, g, c, kFig, a), PreconditionError);
}

TEST_CASE("perturbation function") {
  const Grid g(0.0, 1.0, 51);
  const PopulationState st = fig1_initial(g);
  const auto [c1, c2] = perturbation_f(st, 0.8, kFig, Profile::constant(0.8), g);
  CHECK(c1 == 0.0);
  CHECK(c2 == 0.0);

  const Profile bump = Profile::single_bump(0.9, 0.6, 0.3, 0.05);
  PopulationState peak{0.0, std::vector<double>(51, 0.0), st.u2};
  peak.u1[15] = 100.0;
  CHECK(perturbation_f(peak, bump(0.3), kFig, bump, g).first == doctest::Approx(0.0));

  const auto [f1, f2] = perturbation_f(st, 0.9, kFig, bump, g);
  std::vector<double> integrand;
  for (std::size_t i = 0; i < 51; ++i) integrand.push_back((bump(g.node(i)) - 0.9) * st.u1[i]);
  const double rho2 = oracle::trapezoid(st.u2, g.spacing());
  CHECK(f1 == doctest::Approx(2.0 / (1.0 + 0.01 * rho2) * oracle::trapezoid(integrand, g.spacing())));
  CHECK(f2 == -f1);
  CHECK(f1 < 0.0);
}

TEST_CASE("predicted limit") {
  const Grid g(0.0, 1.0, 201);
  const PopulationState st = fig1_initial(g);
  SUBCASE("single maximiser") {
    const DiscreteMeasure lim =
        predict_limit(st, Profile::single_bump(0.9, 0.6, 0.3, 0.05), kFig, g);
    REQUIRE(lim.atoms().size() == 1);
    CHECK(lim.atoms()[0].position == 0.3);
    CHECK(lim.mass() == doctest::Approx(16.0));
  }
  SUBCASE("constant profile keeps the shape of u1") {
    const DiscreteMeasure lim = predict_limit(st, Profile::constant(0.9), kFig, g);
    CHECK(lim.mass() == doctest::Approx(16.0).epsilon(1e-13));
    const auto& at = lim.atoms();
    for (std::size_t i = 1; i + 1 < g.size(); i += 20) {
      CHECK(at[i].weight / at[1].weight == doctest::Approx(st.u1[i] / st.u1[1]));
    }
  }
  SUBCASE("plateau") {
    const Profile a = Profile::piecewise_linear({0.0, 0.4, 0.6, 1.0}, {0.6, 0.9, 0.9, 0.6});
    const DiscreteMeasure lim = predict_limit(st, a, kFig, g);
    CHECK(lim.mass() == doctest::Approx(16.0).epsilon(1e-13));
    for (const auto& atom : lim.atoms()) {
      if (atom.position < 0.4 - 1e-12 || atom.position > 0.6 + 1e-12) CHECK(atom.weight == 0.0);
    }
  }
  SUBCASE("several separated maxima") {
    CHECK_THROWS_AS(
        predict_limit(st, Profile::two_bump({0.9, 0.9}, 0.6, {0.25, 0.75}, {0.05, 0.05}), kFig, g),
        UnsupportedCaseError);
  }
  SUBCASE("property: scaling the data leaves the limit unchanged") {
    gen::Rng rng(79);
    const Profile plateau = Profile::piecewise_linear({0.0, 0.3, 0.7, 1.0}, {0.6, 0.85, 0.85, 0.7});
    for (int i = 0; i < 20; ++i) {
      const PopulationState base = gen::initial(rng, g);
      const double theta = rng.uniform(0.01, 100.0);
      PopulationState scaled = base;
      for (double& v : scaled.u1) v *= theta;
      for (double& v : scaled.u2) v *= theta;
      for (const Profile* a : {&plateau}) {
        const DiscreteMeasure l0 = predict_limit(base, *a, kFig, g);
        const DiscreteMeasure l1 = predict_limit(scaled, *a, kFig, g);
        CHECK(flat_metric(l0, l1) < 1e-10);
      }
      const Profile bump = gen::bump(rng, g);
      const DiscreteMeasure d0 = predict_limit(base, bump, kFig, g);
      const DiscreteMeasure d1 = predict_limit(scaled, bump, kFig, g);
      CHECK(d0.atoms()[0].position == d1.atoms()[0].position);
      CHECK(d0.mass() == d1.mass());
    }
  }
}

TEST_CASE("stability check") {
  const Grid g(0.0, 1.0, 201);
  const Profile a = Profile::single_bump(0.9, 0.6, 0.3, 0.05);
  const MeasureData mu{DiscreteMeasure::dirac(0.4, 5.0), DiscreteMeasure::dirac(0.6, 20.0)};
  StabilityOptions opt;
  opt.horizon = 2.0;
  SUBCASE("identical data") {
    const StabilityReport rep = stability_check(mu, mu, {0.1, 0.1}, kFig, a, g, opt);
    CHECK(rep.initial_distance == 0.0);
    CHECK(rep.final_distance == 0.0);
    CHECK(rep.passed);
  }
  SUBCASE("epsilon and epsilon / 2") {
    const StabilityReport rep = stability_check(mu, mu, {0.1, 0.05}, kFig, a, g, opt);
    CHECK(rep.initial_distance > 0.0);
    CHECK(rep.final_distance <= rep.bound);
    CHECK(rep.alpha_integral >= 2.0 * opt.horizon);
    CHECK(rep.passed);
    nlohmann::json j = rep;
    CHECK(j["passed"] == true);
  }
}
