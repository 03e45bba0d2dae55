#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "illab/grid.hpp"

namespace illab {

enum class OpTag { volterra, diagonal, damped_shift, partial_isometry, custom };

std::string to_string(OpTag tag);

// Matrix-represented bounded linear operator between discretized L2 spaces.
// The matrix acts directly on value vectors; quadrature factors are baked in.
struct LinearOp {
  Eigen::MatrixXd matrix;
  Grid domain;
  Grid range;
  OpTag tag = OpTag::custom;
};

GridFunction apply(const LinearOp& A, const GridFunction& x);

// Quadrature-weighted adjoint: <Ax,y>_range == <x, A*y>_domain exactly.
LinearOp adjoint(const LinearOp& A);

struct SvdFactors {
  Eigen::VectorXd singular_values;  // nonincreasing
  Eigen::MatrixXd left;             // columns u_k (value coordinates)
  Eigen::MatrixXd right;            // columns v_k
  Grid domain;
  Grid range;
};

// Euclidean SVD of the value matrix. Coincides with the L2 operator SVD
// whenever domain and range share the cell width, which holds for every
// builder in this library.
SvdFactors svd(const LinearOp& A);

// x = sum over sigma_k > cutoff of sigma_k^{-1} <y,u_k> v_k.
GridFunction pseudoinverse_apply(const SvdFactors& f, const GridFunction& y, double cutoff);

LinearOp make_identity(const Grid& grid);

// (Ax)(s) = integral of x over (0,s), lower-triangular midpoint quadrature.
// Maps x == 1 to y(s) == s exactly; accretive: re<Ax,x> = h (sum x)^2 / 2.
LinearOp make_volterra(const Grid& grid);

// Diagonal operator in the standard basis of a sequence-space grid (h = 1).
LinearOp make_diagonal(const Eigen::VectorXd& sigmas);

// S e1 = e1, S e2 = 0, S ek = sigma_k e_{k+1} for 3 <= k <= dim-1 (1-based).
LinearOp make_damped_shift(const std::vector<double>& sigmas, int dim);

// T e1 = 0, T ek = ek for k >= 2.
LinearOp make_partial_isometry(int dim);

double operator_norm_power_iteration(const LinearOp& A, int max_iters = 10000,
                                     double tol = 1e-12);

// min over sampled unit x of re<Ax,x> / ||x||^2.
double accretivity_sample_min(const LinearOp& A, int samples = 1000, std::uint64_t seed = 0);

struct NashedReport {
  std::string classification;  // well_posed | ill_posed_type_I | ill_posed_type_II
  int numerical_rank = 0;
  double decay_exponent = 0.0;
  double cutoff_used = 0.0;
  std::string note;  // records that the split/decay detection is a finite proxy
};

// Finite-dimensional proxy for the closed-range classification: every
// discretized operator has closed range, so the verdict is read off the
// singular-value decay and is advisory metadata only.
NashedReport nashed_classify(const SvdFactors& f, double rank_cutoff = -1.0,
                             double decay_threshold = 1e-3);

// Matrix CSV with a small metadata header (tag, grids).
void write_operator_csv(const LinearOp& A, const std::string& path);

}  // namespace illab
