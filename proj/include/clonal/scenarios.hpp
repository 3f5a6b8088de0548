#pragma once

#include <string>
#include <vector>

#include "clonal/config.hpp"

namespace clonal {

/// Named, ready-to-run configurations.
///
///   fig1             single fitness maximum, concentration in one point
///   fig2             two equal maxima, mass split between them
///   fig2-alt         fig2 with u1 = 500 + 500x, which shifts the split
///   two-compartment  constant-a mass system approaching its equilibrium
///   decay            no proliferating cells, u2 decays like exp(-d t)
///   finite           healthy line plus two competing clones
///
/// The bump widths and floors of a(x) are illustrative choices.
std::vector<std::string> preset_names();

// Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

/// Sets one scalar field by key: p, d, K, a, n_nodes, dt, t_end.
void apply_override(RunConfig& config, const std::string& key, double value);

}  // namespace clonal
