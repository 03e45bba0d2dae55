#pragma once

#include <vector>

namespace illab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

// Ordinary least squares y ~ slope * x + intercept. R^2 is 1 for constant y.
LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

// Fit log(y) ~ slope * log(x); inputs must be positive.
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace illab
