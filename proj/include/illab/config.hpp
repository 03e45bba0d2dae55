#pragma once

#include <cstdint>
#include <string>

namespace illab {

// One experiment invocation; parsed from JSON, serializable back to the same
// shape. Unknown keys and out-of-range values are rejected.
struct ExperimentConfig {
  std::string experiment = "classify";  // classify | qdist | probe_stability |
                                        // probe_local | rates | saturation
  std::string op = "diagonal";  // volterra | diagonal | identity | scalar_rational |
                                // weighted_identity | quadratic_two | autoconv_real |
                                // autoconv_complex
  int n = 200;                       // grid cells / sequence dimension
  std::string method = "tikhonov";   // tikhonov | lavrentiev
  std::string sigma_law = "one_over_k";  // one_over_k | constant | well_posed_step
  std::string target = "default";    // default | zero | one | u1 | u2 | value
  double target_value = 0.0;
  std::string source = "smooth";     // smooth | supersmooth | range_op |
                                     // range_op_squared | zero
  std::string direction_family = "auto";  // auto | bump | oscillatory
  double radius = 0.5;
  int length = 12;
  double delta_min = 1e-7;
  double delta_max = 1e-2;
  int delta_count = 16;
  double alpha_min = 1e-12;
  double alpha_max = 1e4;
  int alpha_count = 60;
  std::uint64_t seed = 0;
  double feasibility_tol = -1.0;  // negative: per-target default
  bool svg = false;
  std::string out_dir = "out";
};

ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);

// Runs the configured experiment and writes its artifacts (CSV, JSON, SVG)
// under cfg.out_dir. On failure an error.json with {code, message} is written
// there and the error is rethrown.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace illab
