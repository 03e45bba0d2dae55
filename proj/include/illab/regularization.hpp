#pragma once

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "illab/grid.hpp"
#include "illab/linear_op.hpp"

namespace illab {

enum class Method { tikhonov, lavrentiev };

std::string to_string(Method m);

struct AlphaGrid {
  double min_alpha = 1e-12;
  double max_alpha = 1e4;
  int count = 60;

  std::vector<double> values() const;  // log-spaced, increasing
};

// Unit noise directions on the range grid: leading and trailing left singular
// directions plus seeded random elements. Labels are sv:<k> / rand:<k>.
struct DirectionSet {
  std::vector<GridFunction> directions;
  std::vector<std::string> labels;
};

DirectionSet make_direction_set(const SvdFactors& f, int leading = 5, int trailing = 5,
                                int random_count = 6, std::uint64_t seed = 0);

// y + delta * direction / ||direction||; the perturbation norm is exactly delta.
GridFunction add_noise(const GridFunction& y, const GridFunction& direction, double delta);

GridFunction tikhonov_solve(const LinearOp& A, const GridFunction& y, double alpha);
GridFunction lavrentiev_solve(const LinearOp& A, const GridFunction& y, double alpha);
GridFunction regularized_solve(const LinearOp& A, Method method, const GridFunction& y,
                               double alpha);

// Per-alpha factorizations (normal equations for Tikhonov, shifted operator
// for Lavrentiev), built lazily and reused across noise levels and directions.
class ShiftCache {
 public:
  ShiftCache(const LinearOp& A, Method method);

  GridFunction solve(double alpha, const GridFunction& y) const;
  Method method() const { return method_; }
  const LinearOp& op() const { return A_; }

 private:
  struct Factor;

  const Factor& factor(double alpha) const;

  LinearOp A_;
  Method method_;
  Eigen::MatrixXd base_;     // A*A or A in value coordinates
  Eigen::MatrixXd rhs_map_;  // A* (Tikhonov) or identity (Lavrentiev)
  mutable std::map<double, std::shared_ptr<Factor>> factors_;
};

struct BestErrorResult {
  double error = 0.0;
  double alpha = 0.0;
  bool extended_low = false;
  bool extended_high = false;
};

// inf_alpha ||x_alpha(ydelta) - xdag|| over the alpha grid; whenever the
// minimizer sits on a grid boundary the grid is extended by factors of 10,
// repeatedly, capped at [1e-30, 1e30].
BestErrorResult best_possible_error(const ShiftCache& cache, const GridFunction& ydelta,
                                    const GridFunction& xdag, const AlphaGrid& grid = {});

struct WorstCaseResult {
  double error = 0.0;
  double alpha = 0.0;
  std::string direction_label;
};

// max over the direction set of the best possible error at noise level delta.
WorstCaseResult worst_case_error(const ShiftCache& cache, const GridFunction& y_exact,
                                 const GridFunction& xdag, const DirectionSet& dirs,
                                 double delta, const AlphaGrid& grid = {});

enum class SourceKind {
  smooth,            // xdag = A*A v
  supersmooth,       // xdag = (A*A)^2 v
  range_op,          // xdag = A w
  range_op_squared,  // xdag = A A w
  zero,
  custom
};

std::string to_string(SourceKind kind);

struct SourceSpec {
  SourceKind kind = SourceKind::smooth;
  std::uint64_t seed = 0;
  GridFunction custom;
};

// The generating element v (resp. w) is a seeded unit element whose
// coefficients in the right singular basis are damped by 1/k, so the smooth
// sources keep a visible spectral tail at every retained frequency.
GridFunction make_source(const LinearOp& A, const SvdFactors& f, const SourceSpec& spec);

}  // namespace illab
