#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace clonal {

/// Outcome of one property suite: how many randomized cases ran, how many
/// individual checks were made and the first few failures verbatim.
struct SuiteReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> first_failures;

  bool passed() const { return failures == 0; }
};

/// metrics, bounds, lyapunov, reduction, envelopes.
std::vector<std::string> suite_names();

// Throws ConfigError for an unknown suite name.
SuiteReport run_suite(const std::string& name, std::uint64_t seed);

/// A suite name or "all". Suites of "all" run concurrently; the reports
/// come back in suite_names() order.
std::vector<SuiteReport> run_suites(const std::string& selector, std::uint64_t seed);

void print_report(std::ostream& os, const SuiteReport& report);

}  // namespace clonal
