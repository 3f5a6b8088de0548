#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "clonal/config.hpp"
#include "clonal/dynamics.hpp"

namespace clonal {

struct RunResult {
  RunConfig config;
  Trajectory trajectory;
  // Final masses, equilibrium comparison, concentration, bound check and
  // the cumulative perturbation integral, depending on the variant.
  nlohmann::json summary;
};

/// Integrates one configuration. IntegrationError escapes with the last
/// valid time; everything else is reported in the summary.
RunResult execute(const RunConfig& config);

/// trajectory.csv, snapshot_t<time>.csv per snapshot, summary.json and,
/// when enabled, masses.svg and densities.svg. Creates `dir`.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

/// One run per value of `key` (see apply_override), at most `jobs` at a
/// time. Each run is written to dir/<key>=<value>/ and a table of final
/// masses to dir/sweep.csv.
std::vector<RunResult> sweep(const RunConfig& base, const std::string& key,
                             const std::vector<double>& values, const std::filesystem::path& dir,
                             std::size_t jobs = 1);

}  // namespace clonal
