#include "clonal/scenarios.hpp"

#include <cmath>

#include "clonal/errors.hpp"

namespace clonal {

namespace {

RunConfig figure_base() {
  RunConfig c;
  c.variant = ModelVariant::continuum;
  c.params = {1.0, 0.2, 0.01};
  c.grid = Grid(0.0, 1.0, 201);
  c.initial.u1 = Expression::parse("1000 - 500*x");
  c.initial.u2 = Expression::parse("1000*x^2");
  c.integrator.dt = 0.01;
  c.integrator.t_end = 200.0;
  c.integrator.snapshot_times = {0.0, 10.0, 50.0, 200.0};
  c.integrator.record_stride = 10;
  return c;
}

Profile fig1_profile() { return Profile::single_bump(0.9, 0.6, 0.3, 0.05); }

Profile fig2_profile() {
  return Profile::two_bump({0.9, 0.9}, 0.6, {0.25, 0.75}, {0.05, 0.05});
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1", "fig2", "fig2-alt", "two-compartment", "decay", "finite"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "fig1") {
    c = figure_base();
    c.profile = fig1_profile();
    c.output.observers = {"V", "flat_dist", "conc_frac", "f1"};
  } else if (name == "fig2" || name == "fig2-alt") {
    c = figure_base();
    c.profile = fig2_profile();
    if (name == "fig2-alt") c.initial.u1 = Expression::parse("500 + 500*x");
    c.output.observers = {"V", "conc_frac", "f1"};
  } else if (name == "two-compartment") {
    c.variant = ModelVariant::two_compartment;
    c.params = {1.0, 0.2, 0.01};
    c.constant_a = 0.9;
    c.initial.v1 = 50.0;
    c.initial.v2 = 20.0;
    c.integrator.dt = 0.01;
    c.integrator.t_end = 500.0;
    c.integrator.record_stride = 10;
    c.output.observers = {"V"};
  } else if (name == "decay") {
    c = figure_base();
    c.profile = fig1_profile();
    c.initial.u1 = Expression::parse("0");
    c.integrator.t_end = 50.0;
    c.integrator.snapshot_times = {0.0, 50.0};
  } else if (name == "finite") {
    c.variant = ModelVariant::finite;
    c.params = {1.0, 0.2, 0.01};
    FiniteCloneState st;
    st.healthy_params = {0.8, 1.0, 0.2};
    st.healthy = {10.0, 50.0};
    st.clone_params = {{0.9, 1.0, 0.2}, {0.85, 1.0, 0.2}};
    st.clones = {{1.0, 0.0}, {1.0, 0.0}};
    st.K_healthy = 0.01;
    st.K_leukemic = 0.01;
    c.finite = st;
    c.integrator.dt = 0.01;
    c.integrator.t_end = 500.0;
    c.integrator.record_stride = 10;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.name = name;
  c.output.dir = "out/" + name;
  c.validate();
  return c;
}

void apply_override(RunConfig& c, const std::string& key, double value) {
  if (key == "p") {
    c.params.p = value;
  } else if (key == "d") {
    c.params.d = value;
  } else if (key == "K") {
    c.params.K = value;
    if (c.finite) c.finite->K_healthy = c.finite->K_leukemic = value;
  } else if (key == "a") {
    if (c.variant != ModelVariant::two_compartment) {
      throw ConfigError("override a: only the two-compartment variant has a constant a");
    }
    c.constant_a = value;
  } else if (key == "n_nodes") {
    if (!(value >= 2.0) || value != std::floor(value)) {
      throw ConfigError("override n_nodes: must be an integer >= 2");
    }
    c.grid = Grid(c.grid.x_lo(), c.grid.x_hi(), static_cast<std::size_t>(value));
  } else if (key == "dt") {
    c.integrator.dt = value;
  } else if (key == "t_end") {
    c.integrator.t_end = value;
    auto& snaps = c.integrator.snapshot_times;
    std::erase_if(snaps, [&](double t) { return t > value; });
  } else {
    throw ConfigError("unknown override key '" + key + "'");
  }
  c.validate();
}

}  // namespace clonal
