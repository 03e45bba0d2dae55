#pragma once

#include <string>
#include <vector>

namespace illab {

// Scientific notation with 14 significant digits, '.' decimal, C locale.
std::string fmt_sci(double value);

// Write-temp-then-rename so concurrent readers never see partial files.
void write_file_atomic(const std::string& path, const std::string& content);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained static SVG 1.1 log-log scatter plot with optional
// reference-slope guide lines (drawn through the last data point).
void write_svg_loglog(const std::string& path, const std::string& title,
                      const std::vector<SvgSeries>& series,
                      const std::vector<double>& reference_slopes);

}  // namespace illab
