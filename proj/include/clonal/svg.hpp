#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace clonal {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static line plot with linear axes, tick labels and a legend. Non-finite
/// points are skipped.
void write_line_plot(std::ostream& os, const std::string& title, const std::string& x_label,
                     std::span<const Series> series);

}  // namespace clonal
