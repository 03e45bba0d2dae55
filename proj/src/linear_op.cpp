#include "illab/linear_op.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "illab/fit.hpp"
#include "illab/report_io.hpp"
#include "illab/rng.hpp"

namespace illab {

std::string to_string(OpTag tag) {
  switch (tag) {
    case OpTag::volterra: return "volterra";
    case OpTag::diagonal: return "diagonal";
    case OpTag::damped_shift: return "damped_shift";
    case OpTag::partial_isometry: return "partial_isometry";
    case OpTag::custom: return "custom";
  }
  return "custom";
}

GridFunction apply(const LinearOp& A, const GridFunction& x) {
  if (!(x.grid() == A.domain)) fail("grid-mismatch", "argument not on the domain grid");
  if (x.is_complex()) {
    return GridFunction::from_values(A.range, A.matrix * x.re(), A.matrix * x.im());
  }
  return GridFunction::from_values(A.range, A.matrix * x.re());
}

LinearOp adjoint(const LinearOp& A) {
  LinearOp out;
  out.matrix = (A.range.h / A.domain.h) * A.matrix.transpose();
  out.domain = A.range;
  out.range = A.domain;
  out.tag = OpTag::custom;
  return out;
}

SvdFactors svd(const LinearOp& A) {
  Eigen::BDCSVD<Eigen::MatrixXd> dec(A.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdFactors f;
  f.singular_values = dec.singularValues();
  f.left = dec.matrixU();
  f.right = dec.matrixV();
  f.domain = A.domain;
  f.range = A.range;
  return f;
}

GridFunction pseudoinverse_apply(const SvdFactors& f, const GridFunction& y, double cutoff) {
  if (!(y.grid() == f.range)) fail("grid-mismatch", "data not on the range grid");
  if (cutoff < 0) fail("invalid-cutoff", "cutoff must be nonnegative");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(f.domain.n);
  const int k = static_cast<int>(f.singular_values.size());
  for (int i = 0; i < k; ++i) {
    const double s = f.singular_values[i];
    if (s <= cutoff) continue;
    x += (f.left.col(i).dot(y.re()) / s) * f.right.col(i);
  }
  return GridFunction::from_values(f.domain, std::move(x));
}

LinearOp make_identity(const Grid& grid) {
  return {Eigen::MatrixXd::Identity(grid.n, grid.n), grid, grid, OpTag::custom};
}

LinearOp make_volterra(const Grid& grid) {
  if (std::abs(grid.a) > 1e-12 || std::abs(grid.b - 1.0) > 1e-12)
    fail("invalid-interval", "Volterra builder expects the interval (0,1)");
  const int n = grid.n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) m(i, k) = grid.h;
    m(i, i) = grid.h / 2.0;  // half cell up to the midpoint node
  }
  return {std::move(m), grid, grid, OpTag::volterra};
}

LinearOp make_diagonal(const Eigen::VectorXd& sigmas) {
  const int n = static_cast<int>(sigmas.size());
  Grid g = make_uniform_grid(n, 0.0, static_cast<double>(n));  // h = 1
  return {sigmas.asDiagonal().toDenseMatrix(), g, g, OpTag::diagonal};
}

LinearOp make_damped_shift(const std::vector<double>& sigmas, int dim) {
  if (dim < 5) fail("dimension-too-small", "damped shift needs dim >= 5");
  if (static_cast<int>(sigmas.size()) < dim)
    fail("dimension-too-small", "need sigma_k for k = 1..dim");
  Grid g = make_uniform_grid(dim, 0.0, static_cast<double>(dim));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  m(0, 0) = 1.0;                       // S e1 = e1
  for (int k = 3; k <= dim - 1; ++k) {  // S ek = sigma_k e_{k+1}, truncated at dim
    if (sigmas[k - 1] == 0.0) fail("invalid-sigma", "sigmas must be nonzero");
    m(k, k - 1) = sigmas[k - 1];
  }
  return {std::move(m), g, g, OpTag::damped_shift};
}

LinearOp make_partial_isometry(int dim) {
  if (dim < 5) fail("dimension-too-small", "partial isometry needs dim >= 5");
  Grid g = make_uniform_grid(dim, 0.0, static_cast<double>(dim));
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
  m(0, 0) = 0.0;  // T e1 = 0
  return {std::move(m), g, g, OpTag::partial_isometry};
}

double operator_norm_power_iteration(const LinearOp& A, int max_iters, double tol) {
  // Power iteration on A^T A in value coordinates; equals the largest
  // singular value whenever domain.h == range.h.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(A.domain.n);
  v[0] += 0.5;  // break symmetry against vectors orthogonal to the top space
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = A.matrix.transpose() * (A.matrix * v);
    const double lam = std::sqrt(w.norm());
    if (w.norm() == 0.0) return 0.0;
    v = w / w.norm();
    if (std::abs(lam - prev) <= tol * std::max(1.0, lam)) return lam;
    prev = lam;
  }
  return prev;
}

double accretivity_sample_min(const LinearOp& A, int samples, std::uint64_t seed) {
  if (!(A.domain == A.range)) fail("non-square-operator", "accretivity needs X == Y");
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = rng.gaussian_vector(A.domain.n);
    const double n2 = A.domain.h * x.squaredNorm();
    if (n2 == 0.0) continue;
    const double q = A.domain.h * x.dot(A.matrix * x);
    worst = std::min(worst, q / n2);
  }
  return worst;
}

namespace {

// Power-law fit of retained singular values against their index.
LineFit sigma_decay_fit(const Eigen::VectorXd& sv, int first, int count) {
  std::vector<double> ks, ss;
  for (int i = 0; i < count; ++i) {
    ks.push_back(static_cast<double>(i + 1));
    ss.push_back(sv[first + i]);
  }
  return loglog_fit(ks, ss);
}

}  // namespace

NashedReport nashed_classify(const SvdFactors& f, double rank_cutoff, double decay_threshold) {
  const Eigen::VectorXd& sv = f.singular_values;
  const double smax = sv.size() ? sv[0] : 0.0;
  if (rank_cutoff < 0) rank_cutoff = 1e-12 * smax;

  NashedReport rep;
  rep.cutoff_used = rank_cutoff;
  rep.note =
      "finite-dimensional proxy: verdict read from singular-value decay; "
      "every discretized operator has closed range";

  int rank = 0;
  while (rank < sv.size() && sv[rank] > rank_cutoff) ++rank;
  rep.numerical_rank = rank;
  if (rank == 0) {
    rep.classification = "well_posed";  // zero operator: closed (trivial) range
    return rep;
  }

  // Flat head + decaying tail: proxy for a type I split. The thresholds
  // (flat_cut, minimum head length) are a calibration choice, not canonical.
  const double flat_cut = 0.9;
  int head = 0;
  while (head < rank && sv[head] >= flat_cut * smax) ++head;
  if (head >= 5 && rank - head >= 8) {
    const LineFit head_fit = sigma_decay_fit(sv, 0, head);
    const LineFit tail_fit = sigma_decay_fit(sv, head, rank - head);
    if (std::abs(head_fit.slope) < 0.05 && tail_fit.slope < -0.5 && tail_fit.r2 > 0.95) {
      rep.classification = "ill_posed_type_I";
      rep.decay_exponent = tail_fit.slope;
      return rep;
    }
  }

  // Whole-spectrum compact-type decay: power law, or exponential fallback.
  if (rank >= 4) {
    const LineFit whole = sigma_decay_fit(sv, 0, rank);
    if (whole.slope < -0.5 && whole.r2 > 0.95) {
      rep.classification = "ill_posed_type_II";
      rep.decay_exponent = whole.slope;
      return rep;
    }
    std::vector<double> ks, ls;
    for (int i = 0; i < rank; ++i) {
      ks.push_back(static_cast<double>(i + 1));
      ls.push_back(std::log(sv[i]));
    }
    const LineFit expfit = least_squares_line(ks, ls);
    if (expfit.slope < -0.05 && expfit.r2 > 0.95 && sv[rank - 1] < decay_threshold * smax) {
      rep.classification = "ill_posed_type_II";
      rep.decay_exponent = whole.slope;
      return rep;
    }
    rep.decay_exponent = whole.slope;
  }

  rep.classification =
      sv[rank - 1] >= decay_threshold * smax ? "well_posed" : "ill_posed_type_II";
  return rep;
}

void write_operator_csv(const LinearOp& A, const std::string& path) {
  std::ostringstream os;
  os << "# tag=" << to_string(A.tag) << "\n";
  os << "# domain=n:" << A.domain.n << ",a:" << fmt_sci(A.domain.a) << ",b:" << fmt_sci(A.domain.b)
     << "\n";
  os << "# range=n:" << A.range.n << ",a:" << fmt_sci(A.range.a) << ",b:" << fmt_sci(A.range.b)
     << "\n";
  for (int i = 0; i < A.matrix.rows(); ++i) {
    for (int j = 0; j < A.matrix.cols(); ++j) {
      if (j) os << ',';
      os << fmt_sci(A.matrix(i, j));
    }
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

}  // namespace illab
