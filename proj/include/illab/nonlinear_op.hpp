#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "illab/grid.hpp"
#include "illab/linear_op.hpp"

namespace illab {

enum class NonlinearKind {
  scalar_rational,    // F(x) = x^2 / (1 + x^4) on a one-cell grid
  weighted_identity,  // [F(x)](s) = psi(x) x(s), psi(x) = integral of x
  quadratic_two,      // F(x) = B(x,x), B(x,y) = <x,u1> S y + <x,u2> T y
  autoconv_real,      // truncated autoconvolution on (0,1), domain x >= 0
  autoconv_complex    // full autoconvolution (0,1) -> (0,2), complex channel
};

std::string to_string(NonlinearKind kind);

struct NonlinearOp {
  NonlinearKind kind;
  Grid domain;
  Grid range;
  int dim = 0;                   // quadratic_two sequence dimension
  std::vector<double> sigmas;    // quadratic_two damping weights
  Eigen::MatrixXd shift_matrix;      // S (quadratic_two only)
  Eigen::MatrixXd isometry_matrix;   // T (quadratic_two only)

  static NonlinearOp scalar_rational();
  static NonlinearOp weighted_identity(const Grid& grid);
  static NonlinearOp quadratic_two(std::vector<double> sigmas, int dim);
  static NonlinearOp autoconv_real(const Grid& grid);
  static NonlinearOp autoconv_complex(const Grid& grid);

  // k-th orthonormal basis element of the quadratic_two sequence space, 1-based.
  GridFunction basis(int k) const;
};

double default_feasibility_tol(const GridFunction& y);

GridFunction eval(const NonlinearOp& F, const GridFunction& x);

// The bilinear form behind the quadratic kinds; symmetric for autoconvolution,
// non-symmetric for quadratic_two.
GridFunction bilinear_eval(const NonlinearOp& F, const GridFunction& x, const GridFunction& y);

// psi(x) = integral of x (weighted_identity helper).
double mean_functional(const GridFunction& x);

// Affine subspace anchor + span{basis columns}; columns are L2-orthonormal in
// value coordinates. Sampling is seeded and deterministic.
struct SubspaceDescriptor {
  GridFunction anchor;
  Eigen::MatrixXd basis;
  std::uint64_t seed = 0;
  int sample_count = 16;

  std::vector<GridFunction> sample() const;
  // Exact distance from x to the affine subspace (orthogonal projection).
  double distance(const GridFunction& x) const;
};

// Orthonormal basis of the discrete mean-zero subspace N = ker(psi).
SubspaceDescriptor mean_zero_subspace(const Grid& grid, std::uint64_t seed = 0);

struct PreimageBranch {
  double a = 0.0;
  double b = 0.0;
  int index = 0;
  GridFunction v;  // component in M = span{u1,u2}
  GridFunction w;  // component in N
};

struct PreimageSet {
  std::vector<GridFunction> points;
  std::optional<SubspaceDescriptor> subspace;
  std::vector<PreimageBranch> branches;
  bool in_range = true;
  double residual = 0.0;  // diagnostic for empty / rejected results

  bool empty() const { return points.empty() && !subspace.has_value(); }
};

// Analytic preimage enumerators for the example operators. Autoconvolution
// preimages are not computed here; see autoconv_preimage_from_solution.
PreimageSet preimage(const NonlinearOp& F, const GridFunction& y, double feasibility_tol = -1.0);

// {x, -x} for the complex full-interval variant, {x} for the nonnegative real
// one; the solution element must be supplied, no deconvolution is attempted.
PreimageSet autoconv_preimage_from_solution(const NonlinearOp& F, const GridFunction& xdag);

// True when y vanishes on the leading cells of its grid (uniqueness flag for
// the real autoconvolution case; necessarily grid-relative).
bool vanishes_near_zero(const GridFunction& y, double tol = 1e-14);

// Sampled estimate of the bilinear bound c with ||B(u,v)|| <= c ||u|| ||v||.
double bilinear_bound_estimate(const NonlinearOp& F, int pairs = 1000, std::uint64_t seed = 0);

// Preimage points to CSV blocks plus a JSON metadata sidecar naming branches.
void write_preimage_csv(const PreimageSet& set, const std::string& path);

}  // namespace illab
