#include "illab/regularization.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>

#include "illab/rng.hpp"

namespace illab {

std::string to_string(Method m) {
  return m == Method::tikhonov ? "tikhonov" : "lavrentiev";
}

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::smooth: return "smooth";
    case SourceKind::supersmooth: return "supersmooth";
    case SourceKind::range_op: return "range_op";
    case SourceKind::range_op_squared: return "range_op_squared";
    case SourceKind::zero: return "zero";
    case SourceKind::custom: return "custom";
  }
  return "?";
}

std::vector<double> AlphaGrid::values() const {
  if (count < 2) fail("invalid-alpha-grid", "need at least two grid points");
  if (!(min_alpha > 0) || !(max_alpha > min_alpha))
    fail("invalid-alpha-grid", "need 0 < min_alpha < max_alpha");
  std::vector<double> out;
  out.reserve(count);
  const double l0 = std::log(min_alpha), l1 = std::log(max_alpha);
  for (int i = 0; i < count; ++i)
    out.push_back(std::exp(l0 + (l1 - l0) * i / (count - 1)));
  return out;
}

DirectionSet make_direction_set(const SvdFactors& f, int leading, int trailing,
                                int random_count, std::uint64_t seed) {
  DirectionSet set;
  const int cols = static_cast<int>(f.left.cols());
  const double hr = std::sqrt(f.range.h);
  leading = std::min(leading, cols);
  trailing = std::min(trailing, cols - leading);
  for (int k = 0; k < leading; ++k) {
    set.directions.push_back(GridFunction::from_values(f.range, f.left.col(k) / hr));
    set.labels.push_back("sv:" + std::to_string(k + 1));
  }
  for (int k = cols - trailing; k < cols; ++k) {
    set.directions.push_back(GridFunction::from_values(f.range, f.left.col(k) / hr));
    set.labels.push_back("sv:" + std::to_string(k + 1));
  }
  Rng rng(seed);
  for (int k = 0; k < random_count; ++k) {
    Eigen::VectorXd g = rng.gaussian_vector(f.range.n);
    GridFunction d = GridFunction::from_values(f.range, std::move(g));
    const double n = norm(d);
    if (n == 0.0) continue;
    d *= 1.0 / n;
    set.directions.push_back(std::move(d));
    set.labels.push_back("rand:" + std::to_string(k + 1));
  }
  return set;
}

GridFunction add_noise(const GridFunction& y, const GridFunction& direction, double delta) {
  if (delta < 0) fail("invalid-delta", "noise level must be nonnegative");
  const double n = norm(direction);
  if (n == 0.0) fail("zero-direction", "noise direction must be nonzero");
  return y + (delta / n) * direction;
}

namespace {

void check_residual(const Eigen::MatrixXd& m, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& rhs) {
  const double res = (m * x - rhs).norm();
  if (!(res <= 1e-10 * rhs.norm() + 1e-280))
    fail("solver-breakdown", "shifted system solve lost accuracy");
}

}  // namespace

GridFunction tikhonov_solve(const LinearOp& A, const GridFunction& y, double alpha) {
  if (!(alpha > 0)) fail("invalid-alpha", "alpha must be positive");
  if (!(y.grid() == A.range)) fail("grid-mismatch", "data not on the range grid");
  const double w = A.range.h / A.domain.h;
  const Eigen::MatrixXd normal =
      w * (A.matrix.transpose() * A.matrix) +
      alpha * Eigen::MatrixXd::Identity(A.domain.n, A.domain.n);
  const Eigen::VectorXd rhs = w * (A.matrix.transpose() * y.re());
  const Eigen::VectorXd x = normal.ldlt().solve(rhs);
  check_residual(normal, x, rhs);
  return GridFunction::from_values(A.domain, x);
}

GridFunction lavrentiev_solve(const LinearOp& A, const GridFunction& y, double alpha) {
  if (!(alpha > 0)) fail("invalid-alpha", "alpha must be positive");
  if (!(A.domain == A.range)) fail("non-square-operator", "this scheme needs X == Y");
  if (!(y.grid() == A.range)) fail("grid-mismatch", "data not on the range grid");
  const Eigen::MatrixXd shifted =
      A.matrix + alpha * Eigen::MatrixXd::Identity(A.domain.n, A.domain.n);
  const Eigen::VectorXd x = shifted.partialPivLu().solve(y.re());
  check_residual(shifted, x, y.re());
  return GridFunction::from_values(A.domain, x);
}

GridFunction regularized_solve(const LinearOp& A, Method method, const GridFunction& y,
                               double alpha) {
  return method == Method::tikhonov ? tikhonov_solve(A, y, alpha)
                                    : lavrentiev_solve(A, y, alpha);
}

struct ShiftCache::Factor {
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd shifted;
};

ShiftCache::ShiftCache(const LinearOp& A, Method method) : A_(A), method_(method) {
  if (method_ == Method::tikhonov) {
    const double w = A.range.h / A.domain.h;
    base_ = w * (A.matrix.transpose() * A.matrix);
    rhs_map_ = w * A.matrix.transpose();
  } else {
    if (!(A.domain == A.range)) fail("non-square-operator", "this scheme needs X == Y");
    base_ = A.matrix;
  }
}

const ShiftCache::Factor& ShiftCache::factor(double alpha) const {
  auto it = factors_.find(alpha);
  if (it != factors_.end()) return *it->second;
  auto f = std::make_shared<Factor>();
  f->shifted = base_ + alpha * Eigen::MatrixXd::Identity(base_.rows(), base_.cols());
  if (method_ == Method::tikhonov) {
    f->ldlt.compute(f->shifted);
  } else {
    f->lu.compute(f->shifted);
  }
  return *factors_.emplace(alpha, std::move(f)).first->second;
}

GridFunction ShiftCache::solve(double alpha, const GridFunction& y) const {
  if (!(alpha > 0)) fail("invalid-alpha", "alpha must be positive");
  if (!(y.grid() == A_.range)) fail("grid-mismatch", "data not on the range grid");
  const Factor& f = factor(alpha);
  const Eigen::VectorXd rhs =
      method_ == Method::tikhonov ? Eigen::VectorXd(rhs_map_ * y.re()) : y.re();
  const Eigen::VectorXd x =
      method_ == Method::tikhonov ? Eigen::VectorXd(f.ldlt.solve(rhs))
                                  : Eigen::VectorXd(f.lu.solve(rhs));
  check_residual(f.shifted, x, rhs);
  return GridFunction::from_values(A_.domain, x);
}

BestErrorResult best_possible_error(const ShiftCache& cache, const GridFunction& ydelta,
                                    const GridFunction& xdag, const AlphaGrid& grid) {
  constexpr double kAlphaFloor = 1e-30;
  constexpr double kAlphaCeil = 1e30;

  std::deque<std::pair<double, double>> scan;  // (alpha, error), alpha increasing
  for (double a : grid.values())
    scan.emplace_back(a, norm(cache.solve(a, ydelta) - xdag));

  BestErrorResult out;
  auto argmin = [&scan] {
    size_t best = 0;
    for (size_t i = 1; i < scan.size(); ++i)
      if (scan[i].second < scan[best].second) best = i;
    return best;
  };

  // Chase a boundary minimizer outward until it becomes interior or the caps
  // are reached.
  for (;;) {
    const size_t i = argmin();
    if (i == 0 && scan.front().first > kAlphaFloor) {
      const double a = std::max(scan.front().first / 10.0, kAlphaFloor);
      scan.emplace_front(a, norm(cache.solve(a, ydelta) - xdag));
      out.extended_low = true;
      continue;
    }
    if (i + 1 == scan.size() && scan.back().first < kAlphaCeil) {
      const double a = std::min(scan.back().first * 10.0, kAlphaCeil);
      scan.emplace_back(a, norm(cache.solve(a, ydelta) - xdag));
      out.extended_high = true;
      continue;
    }
    out.alpha = scan[i].first;
    out.error = scan[i].second;
    return out;
  }
}

WorstCaseResult worst_case_error(const ShiftCache& cache, const GridFunction& y_exact,
                                 const GridFunction& xdag, const DirectionSet& dirs,
                                 double delta, const AlphaGrid& grid) {
  if (dirs.directions.empty()) fail("zero-direction", "direction set is empty");
  WorstCaseResult worst;
  worst.error = -1.0;
  for (size_t i = 0; i < dirs.directions.size(); ++i) {
    const GridFunction ydelta = add_noise(y_exact, dirs.directions[i], delta);
    const BestErrorResult best = best_possible_error(cache, ydelta, xdag, grid);
    if (best.error > worst.error) {
      worst.error = best.error;
      worst.alpha = best.alpha;
      worst.direction_label = dirs.labels[i];
    }
  }
  return worst;
}

GridFunction make_source(const LinearOp& A, const SvdFactors& f, const SourceSpec& spec) {
  if (spec.kind == SourceKind::zero) return GridFunction::zero(A.domain);
  if (spec.kind == SourceKind::custom) {
    if (!(spec.custom.grid() == A.domain))
      fail("grid-mismatch", "custom source not on the domain grid");
    return spec.custom;
  }
  Rng rng(spec.seed);
  Eigen::VectorXd coef = rng.gaussian_vector(A.domain.n);
  for (int k = 0; k < coef.size(); ++k) coef[k] /= (k + 1);  // spectral damping
  GridFunction v = GridFunction::from_values(A.domain, f.right * coef);
  const double n = norm(v);
  if (n == 0.0) fail("zero-direction", "degenerate source generator");
  v *= 1.0 / n;

  const LinearOp At = adjoint(A);
  switch (spec.kind) {
    case SourceKind::smooth:
      return apply(At, apply(A, v));
    case SourceKind::supersmooth: {
      const GridFunction w = apply(At, apply(A, v));
      return apply(At, apply(A, w));
    }
    case SourceKind::range_op:
      if (!(A.domain == A.range)) fail("non-square-operator", "range source needs X == Y");
      return apply(A, v);
    case SourceKind::range_op_squared:
      if (!(A.domain == A.range)) fail("non-square-operator", "range source needs X == Y");
      return apply(A, apply(A, v));
    default:
      break;
  }
  fail("unsupported-kind", "unknown source kind");
}

}  // namespace illab
