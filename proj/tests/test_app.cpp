#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "clonal/config.hpp"
#include "clonal/errors.hpp"
#include "clonal/expression.hpp"
#include "clonal/run.hpp"
#include "clonal/scenarios.hpp"
#include "clonal/svg.hpp"
#include "clonal/verify.hpp"

using namespace clonal;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  std::istringstream is(text);
  try {
    parse_config(is, "test.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("clonal_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kContinuum = R"(
[model]
variant = continuum
p = 1
d = 0.2
K = 0.01

[profile]
kind = single-bump
peak = 0.9
floor = 0.6
center = 0.3
width = 0.05

[grid]
n_nodes = 51

[initial]
u1 = 1000 - 500*x
u2 = 1000*x^2

[integrator]
dt = 0.01
t_end = 2
snapshot_times = 0, 1
record_stride = 10

[output]
observers = V, conc_frac
svg = false
)";

}  // namespace

TEST_CASE("expressions") {
  CHECK(Expression::parse("1000 - 500*x")(0.5) == 750.0);
  CHECK(Expression::parse("1000*x^2")(0.5) == 250.0);
  CHECK(Expression::parse("-(x + 1) * 2 / 4")(1.0) == -1.0);
  CHECK(Expression::parse("2^0 + x^3")(2.0) == 9.0);
  CHECK(Expression::parse(" 1.5e2 ")(0.0) == 150.0);
  CHECK(Expression::parse("--x")(3.0) == 3.0);
  CHECK(Expression::parse("1 - 2 - 3")(0.0) == -4.0);
  CHECK(Expression::parse("8 / 4 / 2")(0.0) == 1.0);
  CHECK(Expression::parse("x*x").text() == "x*x");

  for (const char* bad : {"", "1 +", "(x", "x ^ 0.5", "y", "2 x", "x^-1", "1..2"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(Expression::parse(bad), ConfigError);
  }
  try {
    Expression::parse("1 + $");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("column 5") != std::string::npos);
  }
}

TEST_CASE("config parsing") {
  std::istringstream is(kContinuum);
  const RunConfig c = parse_config(is);
  CHECK(c.variant == ModelVariant::continuum);
  CHECK(c.grid.size() == 51);
  CHECK(c.profile->kind() == ProfileKind::single_bump);
  CHECK((*c.profile)(0.3) == doctest::Approx(0.9));
  CHECK(c.integrator.snapshot_times.size() == 2);
  CHECK(c.integrator.record_stride == 10);
  CHECK(c.output.observers == std::vector<std::string>{"V", "conc_frac"});
  CHECK_FALSE(c.output.svg);
  const PopulationState st = initial_state(c);
  CHECK(st.u1[0] == 1000.0);
  CHECK(st.u2.back() == 1000.0);

  SUBCASE("atoms with mollification") {
    std::istringstream atoms(R"(
[profile]
kind = constant
value = 0.8
[grid]
n_nodes = 201
[initial]
u1_atoms = 0.4:2.0
u2_atoms = 0.4:1.0, 0.6:3.0
epsilon = 0.1
[integrator]
t_end = 1
)");
    const RunConfig a = parse_config(atoms);
    CHECK(a.initial.u2_atoms->mass() == 4.0);
    CHECK(total_mass(initial_state(a).u1, a.grid) == doctest::Approx(2.0).epsilon(1e-13));
  }
  SUBCASE("two-compartment and finite variants") {
    std::istringstream two("[model]\nvariant = two-compartment\na = 0.8\n[initial]\nv1 = 3\nv2 = 4\n");
    const RunConfig t = parse_config(two);
    CHECK(t.constant_a == 0.8);
    CHECK(t.initial.v2 == 4.0);
    std::istringstream fin(
        "[model]\nvariant = finite\nhealthy = 0.8, 1, 0.2\nclones = 0.9,1,0.2; 0.7,1,0.3\n"
        "K_leukemic = 0.02\n[initial]\nhealthy = 10, 20\nclones = 1,0; 2,0\n");
    const RunConfig f = parse_config(fin);
    REQUIRE(f.finite);
    CHECK(f.finite->clones.size() == 2);
    CHECK(f.finite->clone_params[1].d2 == 0.3);
    CHECK(f.finite->K_leukemic == 0.02);
    CHECK(f.finite->K_healthy == 0.01);
  }
  SUBCASE("piecewise-linear, tabulated and two-bump profiles") {
    std::istringstream pl(
        "[profile]\nkind = piecewise-linear\nnodes = 0, 0.5, 1\nvalues = 0.6, 0.9, 0.6\n"
        "[initial]\nu1 = 1\nu2 = 1\n");
    CHECK((*parse_config(pl).profile)(0.25) == doctest::Approx(0.75));
    std::istringstream tab("[profile]\nkind = tabulated\nvalues = 0.6, 0.8\n[initial]\nu1 = 1\nu2 = 1\n");
    CHECK((*parse_config(tab).profile)(0.5) == doctest::Approx(0.7));
    std::istringstream two(
        "[profile]\nkind = two-bump\npeaks = 0.9, 0.85\nfloor = 0.6\ncenters = 0.25, 0.75\n"
        "width = 0.05\n[initial]\nu1 = 1\nu2 = 1\n");
    CHECK((*parse_config(two).profile)(0.75) == doctest::Approx(0.85));
  }
}

TEST_CASE("config errors name the field") {
  const std::string base = "[initial]\nu1 = 1\nu2 = 1\n[profile]\nkind = constant\nvalue = 0.8\n";
  CHECK(config_error(base + "[model]\np = -1\n").find("[model]") != std::string::npos);
  CHECK(config_error(base + "[model]\np = abc\n").find("[model] p") != std::string::npos);
  CHECK(config_error(base + "[model]\nq = 1\n").find("[model] q: unknown field") !=
        std::string::npos);
  CHECK(config_error(base + "[extra]\nq = 1\n").find("unknown section [extra]") !=
        std::string::npos);
  CHECK(config_error(base + "[grid]\nn_nodes = 2.5\n").find("[grid] n_nodes") != std::string::npos);
  CHECK(config_error(base + "[integrator]\ndt = 0\n").find("[integrator]") != std::string::npos);
  CHECK(config_error(base + "[output]\nobservers = V, bogus\n").find("[output] observers") !=
        std::string::npos);
  CHECK(config_error(base + "[output]\nsvg = maybe\n").find("[output] svg") != std::string::npos);
  CHECK(config_error("[profile]\nkind = constant\nvalue = 0.8\n[initial]\nu1 = 1 +\nu2 = 1\n")
            .find("[initial] u1") != std::string::npos);
  CHECK(config_error("[profile]\nkind = constant\nvalue = 1.2\n[initial]\nu1 = 1\nu2 = 1\n")
            .find("[profile]") != std::string::npos);
  CHECK(config_error("[profile]\nkind = wiggly\n[initial]\nu1 = 1\nu2 = 1\n")
            .find("[profile] kind") != std::string::npos);
  CHECK(config_error("[initial]\nu1 = 1\nu2 = 1\n").find("[profile]") != std::string::npos);
  CHECK(config_error("[profile]\nkind = constant\nvalue = 0.8\n[initial]\nu1 = 1\n")
            .find("[initial]") != std::string::npos);
  CHECK(config_error("[profile]\nkind = constant\nvalue = 0.8\n[initial]\nu1 = 0 - 1\nu2 = 1\n")
            .find("[initial]") != std::string::npos);
  CHECK(config_error("[profile]\nkind = constant\nvalue = 0.8\n[initial]\nu1_atoms = 0.5:1\n"
                     "u2_atoms = 0.5:1\nepsilon = 0.01\n")
            .find("[initial]") != std::string::npos);
  CHECK(config_error("[model]\nvariant = two-compartment\na = 0.4\n[initial]\nv1 = 1\nv2 = 1\n")
            .find("[model] a") != std::string::npos);
  CHECK(config_error("[model]\nvariant = nope\n").find("[model] variant") != std::string::npos);
  CHECK(config_error("[model\n").find("test.ini:1") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const RunConfig c = preset(name);
    CHECK(c.name == name);
  }
  const RunConfig f1 = preset("fig1");
  CHECK(f1.params.K == 0.01);
  CHECK(f1.params.p == 1.0);
  CHECK(f1.params.d == 0.2);
  CHECK(f1.initial.u1->text() == "1000 - 500*x");
  CHECK(f1.initial.u2->text() == "1000*x^2");
  CHECK(f1.grid.x_lo() == 0.0);
  CHECK(f1.grid.x_hi() == 1.0);
  const RunConfig f2 = preset("fig2");
  CHECK(argmax_set(*f2.profile, f2.grid, 0.0).size() == 2);
  CHECK(f2.initial.u1->text() == "1000 - 500*x");
  CHECK_THROWS_AS(preset("fig9"), ConfigError);

  RunConfig c = preset("fig1");
  apply_override(c, "n_nodes", 101);
  CHECK(c.grid.size() == 101);
  apply_override(c, "t_end", 20);
  CHECK(c.integrator.snapshot_times == std::vector<double>{0.0, 10.0});
  CHECK_THROWS_AS(apply_override(c, "a", 0.8), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "zeta", 1), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "K", -1), ConfigError);
}

TEST_CASE("run writes the documented outputs") {
  std::istringstream is(kContinuum);
  const RunConfig c = parse_config(is);
  const RunResult r = execute(c);
  const fs::path dir = scratch("run");
  write_outputs(r, dir);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "snapshot_t0.csv"));
  CHECK(fs::exists(dir / "snapshot_t1.csv"));
  CHECK_FALSE(fs::exists(dir / "snapshot_t2.csv"));
  CHECK_FALSE(fs::exists(dir / "masses.svg"));
  CHECK(slurp(dir / "trajectory.csv").rfind("t,rho1,rho2,s,V,conc_frac\n", 0) == 0);
  CHECK(slurp(dir / "snapshot_t1.csv").rfind("x,u1,u2\n", 0) == 0);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["final"]["t"] == 2.0);
  CHECK(summary["equilibrium"]["rho2_bar"] == doctest::Approx(80.0));
  CHECK(summary["bounds"]["check"]["passed"] == true);
  CHECK(summary["concentration"]["sites"].size() == 1);
  CHECK(summary["perturbation"]["integral_abs_f1"].get<double>() > 0.0);
  CHECK(r.trajectory.size() == 21);

  SUBCASE("identical runs give byte-identical csv") {
    const fs::path again = scratch("run_again");
    write_outputs(execute(c), again);
    CHECK(slurp(dir / "trajectory.csv") == slurp(again / "trajectory.csv"));
    CHECK(slurp(dir / "snapshot_t1.csv") == slurp(again / "snapshot_t1.csv"));
  }
}

TEST_CASE("decay preset: no proliferating cells") {
  RunConfig c = preset("decay");
  apply_override(c, "t_end", 10);
  const RunResult r = execute(c);
  const double r0 = r.trajectory.rho2.front();
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    CHECK(r.trajectory.rho1[k] == 0.0);
    CHECK(r.trajectory.rho2[k] ==
          doctest::Approx(r0 * std::exp(-0.2 * r.trajectory.times[k])).epsilon(1e-10));
  }
  CHECK(r.summary["bounds"]["status"] == "not applicable");
  CHECK(r.summary["concentration"]["fraction"].is_null());
}

TEST_CASE("two-compartment and finite runs") {
  RunConfig t = preset("two-compartment");
  const RunResult rt = execute(t);
  CHECK(rt.summary["lyapunov"]["passed"] == true);
  CHECK(rt.summary["final"]["rho2"].get<double>() == doctest::Approx(80.0).epsilon(1e-6));

  RunConfig f = preset("finite");
  apply_override(f, "t_end", 300);
  const RunResult rf = execute(f);
  const auto& lines = rf.summary["lines"];
  REQUIRE(lines.size() == 3);
  // The clone with the largest self-renewal takes over.
  CHECK(lines[1]["proliferating"].get<double>() == doctest::Approx(16.0).epsilon(1e-4));
  CHECK(lines[0]["proliferating"].get<double>() < 1e-6);
  CHECK(rf.trajectory.find_column("clone2_2") != nullptr);
}

TEST_CASE("sweep") {
  RunConfig c = preset("two-compartment");
  apply_override(c, "t_end", 200);
  const fs::path dir = scratch("sweep");
  const auto res = sweep(c, "a", {0.7, 0.8, 0.9}, dir, 2);
  REQUIRE(res.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = 0.7 + 0.1 * static_cast<double>(i);
    CHECK(res[i].trajectory.rho2.back() == doctest::Approx((2 * a - 1) / 0.01).epsilon(1e-4));
  }
  CHECK(fs::exists(dir / "a=0.8" / "summary.json"));
  const std::string table = slurp(dir / "sweep.csv");
  CHECK(table.rfind("a,rho1,rho2\n0.7,", 0) == 0);
  CHECK_THROWS_AS(sweep(c, "a", {}, dir), ConfigError);
}

TEST_CASE("svg emitter") {
  std::ostringstream os;
  const std::vector<Series> s = {{"a<b", {0, 1, 2}, {1, NAN, 3}}, {"flat", {0, 1}, {2, 2}}};
  write_line_plot(os, "title & more", "t", s);
  const std::string svg = os.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("title &amp; more") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  std::ostringstream empty;
  write_line_plot(empty, "empty", "x", {});
  CHECK(empty.str().find("</svg>") != std::string::npos);
}

TEST_CASE("verification suites") {
  CHECK(suite_names().size() == 5);
  const SuiteReport m = run_suite("metrics", 0);
  CHECK(m.passed());
  CHECK(m.cases == 205);
  const SuiteReport r = run_suite("reduction", 1);
  CHECK(r.passed());
  CHECK_THROWS_AS(run_suite("nope", 0), ConfigError);
  std::ostringstream os;
  print_report(os, m);
  CHECK(os.str().rfind("PASS metrics: 205 cases", 0) == 0);
}
