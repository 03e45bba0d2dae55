#pragma once

#include <string>
#include <vector>

#include "illab/fit.hpp"
#include "illab/regularization.hpp"

namespace illab {

struct RateSettings {
  double delta_min = 1e-7;
  double delta_max = 1e-2;
  int delta_count = 16;
  AlphaGrid alpha_grid;
  int leading = 5;
  int trailing = 5;
  int random_count = 6;
  std::uint64_t seed = 0;
  bool worst_case = true;  // max over the direction set; otherwise rand:1 only
};

struct RateSeries {
  std::vector<double> deltas;
  std::vector<double> errors;
  std::vector<double> alphas;  // minimizing alpha per noise level
  std::vector<std::string> direction_labels;
  double kappa = 0.0;      // fitted exponent of error ~ delta^kappa
  double intercept = 0.0;  // log-log intercept
  double r2 = 0.0;
  bool underflow_all = false;
};

// Points at or below the floor max(1e-12 ||xdag||, 1e-14) are excluded from
// the fit; they carry no rate information.
double underflow_floor(double xdag_norm);
LineFit fit_rate_exponent(const std::vector<double>& deltas, const std::vector<double>& errors,
                          double floor_value);

RateSeries run_rate_experiment(const LinearOp& A, Method method, const GridFunction& xdag,
                               const RateSettings& settings);

struct SaturationVerdict {
  SourceKind source = SourceKind::smooth;
  RateSeries series;
  double cap = 0.0;     // 2/3 for Tikhonov, 1/2 for the accretive scheme
  std::string verdict;  // rate_capped | rate_improves | degenerate_zero
};

// Runs the method on a baseline smooth source, an extra-smooth source, and
// the zero solution; an extra-smooth source failing to beat the cap by more
// than cap_tol is reported as rate_capped.
std::vector<SaturationVerdict> saturation_experiment(const LinearOp& A, Method method,
                                                     const RateSettings& settings,
                                                     double cap_tol = 0.08);

void write_rate_csv(const RateSeries& series, const std::string& path);
void write_rate_svg(const RateSeries& series, const std::string& path);
void write_saturation_report(const std::vector<SaturationVerdict>& verdicts,
                             const std::string& path);

}  // namespace illab
