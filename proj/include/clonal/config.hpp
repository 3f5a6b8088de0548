#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clonal/dynamics.hpp"
#include "clonal/expression.hpp"
#include "clonal/measures.hpp"
#include "clonal/model.hpp"

namespace clonal {

enum class ModelVariant { continuum, finite, two_compartment };

const char* to_string(ModelVariant v);

struct InitialData {
  // Continuum: closed-form densities, or atoms mollified at `epsilon`.
  std::optional<Expression> u1;
  std::optional<Expression> u2;
  std::optional<DiscreteMeasure> u1_atoms;
  std::optional<DiscreteMeasure> u2_atoms;
  double epsilon = 0.0;
  // Two-compartment masses.
  double v1 = 0.0;
  double v2 = 0.0;
};

struct OutputSpec {
  std::string dir = "out";
  // Any of V, flat_dist, conc_frac, f1; written in that order.
  std::vector<std::string> observers;
  bool svg = true;
};

/// Everything a single `run` needs. Built from an INI document with the
/// sections [model], [profile], [grid], [initial], [integrator], [output],
/// or from a named preset.
struct RunConfig {
  std::string name = "run";
  ModelVariant variant = ModelVariant::continuum;
  ModelParams params;
  std::optional<Profile> profile;
  double constant_a = 0.9;
  std::optional<FiniteCloneState> finite;
  Grid grid{0.0, 1.0, 201};
  InitialData initial;
  IntegratorConfig integrator;
  OutputSpec output;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Initial densities of a continuum configuration on its grid.
PopulationState initial_state(const RunConfig& config);

}  // namespace clonal
