#include "illab/nonlinear_op.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "illab/report_io.hpp"
#include "illab/rng.hpp"

namespace illab {

std::string to_string(NonlinearKind kind) {
  switch (kind) {
    case NonlinearKind::scalar_rational: return "scalar_rational";
    case NonlinearKind::weighted_identity: return "weighted_identity";
    case NonlinearKind::quadratic_two: return "quadratic_two";
    case NonlinearKind::autoconv_real: return "autoconv_real";
    case NonlinearKind::autoconv_complex: return "autoconv_complex";
  }
  return "?";
}

NonlinearOp NonlinearOp::scalar_rational() {
  NonlinearOp op;
  op.kind = NonlinearKind::scalar_rational;
  op.domain = make_uniform_grid(1, 0.0, 1.0);  // h = 1: the norm of a constant is |c|
  op.range = op.domain;
  return op;
}

NonlinearOp NonlinearOp::weighted_identity(const Grid& grid) {
  NonlinearOp op;
  op.kind = NonlinearKind::weighted_identity;
  op.domain = grid;
  op.range = grid;
  return op;
}

NonlinearOp NonlinearOp::quadratic_two(std::vector<double> sigmas, int dim) {
  NonlinearOp op;
  op.kind = NonlinearKind::quadratic_two;
  op.dim = dim;
  LinearOp S = make_damped_shift(sigmas, dim);
  LinearOp T = make_partial_isometry(dim);
  op.domain = S.domain;
  op.range = S.range;
  op.sigmas = std::move(sigmas);
  op.shift_matrix = std::move(S.matrix);
  op.isometry_matrix = std::move(T.matrix);
  return op;
}

NonlinearOp NonlinearOp::autoconv_real(const Grid& grid) {
  if (std::abs(grid.a) > 1e-12 || std::abs(grid.b - 1.0) > 1e-12)
    fail("invalid-interval", "autoconvolution expects the interval (0,1)");
  NonlinearOp op;
  op.kind = NonlinearKind::autoconv_real;
  op.domain = grid;
  op.range = grid;
  return op;
}

NonlinearOp NonlinearOp::autoconv_complex(const Grid& grid) {
  if (std::abs(grid.a) > 1e-12 || std::abs(grid.b - 1.0) > 1e-12)
    fail("invalid-interval", "autoconvolution expects the interval (0,1)");
  NonlinearOp op;
  op.kind = NonlinearKind::autoconv_complex;
  op.domain = grid;
  op.range = make_uniform_grid(2 * grid.n, 0.0, 2.0);
  return op;
}

GridFunction NonlinearOp::basis(int k) const {
  if (kind != NonlinearKind::quadratic_two) fail("unsupported-kind", "basis needs quadratic_two");
  if (k < 1 || k > dim) fail("dimension-mismatch", "basis index out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e[k - 1] = 1.0;
  return GridFunction::from_values(domain, std::move(e));
}

double default_feasibility_tol(const GridFunction& y) { return 1e-8 * (1.0 + norm(y)); }

double mean_functional(const GridFunction& x) { return x.grid().h * x.re().sum(); }

namespace {

// Truncated discrete convolution z_i = h sum_{k} x_k y_{i-k}, i = 0..len-1.
void convolve(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double h, Eigen::VectorXd& out) {
  const int n = static_cast<int>(x.size());
  const int len = static_cast<int>(out.size());
  for (int i = 0; i < len; ++i) {
    double s = 0.0;
    const int klo = std::max(0, i - n + 1);
    const int khi = std::min(i, n - 1);
    for (int k = klo; k <= khi; ++k) s += x[k] * y[i - k];
    out[i] = h * s;
  }
}

GridFunction autoconv_bilinear(const NonlinearOp& F, const GridFunction& x, const GridFunction& y) {
  const Grid& out_grid = F.range;
  if (F.kind == NonlinearKind::autoconv_real) {
    Eigen::VectorXd z(out_grid.n);
    convolve(x.re(), y.re(), F.domain.h, z);
    return GridFunction::from_values(out_grid, std::move(z));
  }
  // complex channel: (xr + i xi) * (yr + i yi)
  const Eigen::VectorXd xr = x.re(), yr = y.re();
  const Eigen::VectorXd xi = x.is_complex() ? x.im() : Eigen::VectorXd::Zero(xr.size());
  const Eigen::VectorXd yi = y.is_complex() ? y.im() : Eigen::VectorXd::Zero(yr.size());
  Eigen::VectorXd rr(out_grid.n), ii(out_grid.n), ri(out_grid.n), ir(out_grid.n);
  convolve(xr, yr, F.domain.h, rr);
  convolve(xi, yi, F.domain.h, ii);
  convolve(xr, yi, F.domain.h, ri);
  convolve(xi, yr, F.domain.h, ir);
  return GridFunction::from_values(out_grid, rr - ii, ri + ir);
}

}  // namespace

GridFunction bilinear_eval(const NonlinearOp& F, const GridFunction& x, const GridFunction& y) {
  switch (F.kind) {
    case NonlinearKind::quadratic_two: {
      if (x.size() != F.dim || y.size() != F.dim)
        fail("dimension-mismatch", "bilinear arguments must match the sequence dimension");
      const double c1 = x.re()[0];  // <x,u1>, h = 1
      const double c2 = x.re()[1];  // <x,u2>
      Eigen::VectorXd out = c1 * (F.shift_matrix * y.re()) + c2 * (F.isometry_matrix * y.re());
      return GridFunction::from_values(F.domain, std::move(out));
    }
    case NonlinearKind::autoconv_real:
    case NonlinearKind::autoconv_complex:
      return autoconv_bilinear(F, x, y);
    default:
      fail("unsupported-kind", "no bilinear form for " + to_string(F.kind));
  }
}

GridFunction eval(const NonlinearOp& F, const GridFunction& x) {
  if (!(x.grid() == F.domain)) fail("grid-mismatch", "argument not on the domain grid");
  switch (F.kind) {
    case NonlinearKind::scalar_rational: {
      const double t = x.re()[0];
      const double t2 = t * t;
      return GridFunction::constant(F.domain, t2 / (1.0 + t2 * t2));
    }
    case NonlinearKind::weighted_identity:
      return mean_functional(x) * x;
    case NonlinearKind::quadratic_two:
      return bilinear_eval(F, x, x);
    case NonlinearKind::autoconv_real: {
      if ((x.re().array() < -1e-12).any())
        fail("domain-violation", "autoconv_real needs x >= 0 a.e.");
      return autoconv_bilinear(F, x, x);
    }
    case NonlinearKind::autoconv_complex:
      return autoconv_bilinear(F, x, x);
  }
  fail("unsupported-kind", "unknown operator kind");
}

std::vector<GridFunction> SubspaceDescriptor::sample() const {
  Rng rng(seed);
  std::vector<GridFunction> out;
  out.reserve(sample_count);
  for (int s = 0; s < sample_count; ++s) {
    Eigen::VectorXd coef = rng.gaussian_vector(static_cast<int>(basis.cols()));
    GridFunction p = anchor;
    p.re() += basis * coef;
    out.push_back(std::move(p));
  }
  return out;
}

double SubspaceDescriptor::distance(const GridFunction& x) const {
  if (!(x.grid() == anchor.grid())) fail("grid-mismatch", "point not on the subspace grid");
  const double h = anchor.grid().h;
  Eigen::VectorXd r = x.re() - anchor.re();
  Eigen::VectorXd coef = h * (basis.transpose() * r);
  r -= basis * coef;
  return std::sqrt(h * r.squaredNorm());
}

SubspaceDescriptor mean_zero_subspace(const Grid& grid, std::uint64_t seed) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(grid.n, 1);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  Eigen::MatrixXd q = qr.householderQ();
  SubspaceDescriptor sub;
  sub.anchor = GridFunction::zero(grid);
  sub.basis = q.rightCols(grid.n - 1) / std::sqrt(grid.h);
  sub.seed = seed;
  return sub;
}

namespace {

// Bisection on a monotone segment; [lo,hi] must bracket the target level.
double bisect_level(const std::function<double(double)>& f, double lo, double hi, double level) {
  double flo = f(lo) - level;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - level;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

PreimageSet preimage_scalar_rational(const NonlinearOp& F, const GridFunction& y, double tol) {
  auto f = [](double t) { return t * t / (1.0 + t * t * t * t); };
  const double c = y.re()[0];
  PreimageSet set;
  const double abs_tol = tol * (1.0 + std::abs(c));
  if (c < -abs_tol || c > 0.5 + abs_tol) {
    set.in_range = false;
    set.residual = c < 0 ? -c : c - 0.5;
    return set;
  }
  auto push = [&](double root) {
    set.points.push_back(GridFunction::constant(F.domain, root));
  };
  if (c <= 0.0) {
    push(0.0);  // F(x) = 0 only at x = 0
    return set;
  }
  const double cc = std::min(c, 0.5);
  if (cc >= 0.5) {
    push(-1.0);
    push(1.0);
    return set;
  }
  const double inner_root = bisect_level(f, 0.0, 1.0, cc);
  const double outer_root = bisect_level(f, 1.0, 2.0 / std::sqrt(cc), cc);
  push(-outer_root);
  push(-inner_root);
  push(inner_root);
  push(outer_root);
  return set;
}

PreimageSet preimage_weighted_identity(const NonlinearOp& F, const GridFunction& y, double tol,
                                       std::uint64_t seed) {
  PreimageSet set;
  const double ny = norm(y);
  const double psi = mean_functional(y);
  if (ny <= tol) {
    // F^{-1}(0) = N, the mean-zero subspace.
    set.subspace = mean_zero_subspace(F.domain, seed);
    set.points.push_back(GridFunction::zero(F.domain));
    return set;
  }
  if (psi <= 0.0) {
    set.in_range = false;
    set.residual = -psi;
    return set;
  }
  const double scale = 1.0 / std::sqrt(psi);
  set.points.push_back(scale * y);
  set.points.push_back(-scale * y);
  return set;
}

PreimageSet preimage_quadratic_two(const NonlinearOp& F, const GridFunction& y, double tol) {
  PreimageSet set;
  const int dim = F.dim;
  const int nN = dim - 2;
  const double abs_tol = tol * (1.0 + norm(y));
  const double y1 = y.re()[0], y2 = y.re()[1];
  if (y1 < -abs_tol || y2 < -abs_tol) {
    set.in_range = false;
    set.residual = std::max(-y1, -y2);
    return set;
  }
  const double a = std::sqrt(std::max(y1, 0.0));
  const double b = std::sqrt(std::max(y2, 0.0));
  const Eigen::VectorXd yN = y.re().segment(2, nN);

  // S restricted to N in its own coordinates (k = j + 3, 1-based).
  Eigen::MatrixXd sN = Eigen::MatrixXd::Zero(nN, nN);
  for (int j = 0; j + 1 < nN; ++j) sN(j + 1, j) = F.sigmas[j + 2];

  struct Signs { double sa, sb; };
  std::vector<Signs> combos;
  const bool a_zero = (a == 0.0), b_zero = (b == 0.0);
  for (double sa : {1.0, -1.0}) {
    for (double sb : {1.0, -1.0}) {
      if (a_zero && sa < 0) continue;
      if (b_zero && sb < 0) continue;
      combos.push_back({sa, sb});
    }
  }
  if (a_zero && b_zero) combos = {{1.0, 1.0}};

  int index = 0;
  double worst_residual = 0.0;
  for (const auto& s : combos) {
    ++index;
    const Eigen::MatrixXd m = s.sa * a * sN + s.sb * b * Eigen::MatrixXd::Identity(nN, nN);
    // Minimum-norm least squares; the truncated shift block can be singular.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    const Eigen::VectorXd wN = cod.solve(yN);
    const double res = (m * wN - yN).norm();  // h = 1
    if (res > abs_tol) {
      worst_residual = std::max(worst_residual, res);
      continue;  // branch linear system not solvable for this y
    }
    PreimageBranch branch;
    branch.a = a;
    branch.b = b;
    branch.index = index;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v[0] = s.sa * a;
    v[1] = s.sb * b;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
    w.segment(2, nN) = wN;
    branch.v = GridFunction::from_values(F.domain, v);
    branch.w = GridFunction::from_values(F.domain, w);
    set.points.push_back(GridFunction::from_values(F.domain, v + w));
    set.branches.push_back(std::move(branch));
  }
  if (set.points.empty()) {
    set.in_range = false;
    set.residual = worst_residual;
  }
  return set;
}

}  // namespace

PreimageSet preimage(const NonlinearOp& F, const GridFunction& y, double feasibility_tol) {
  if (feasibility_tol < 0) feasibility_tol = 1e-8;
  switch (F.kind) {
    case NonlinearKind::scalar_rational:
      return preimage_scalar_rational(F, y, feasibility_tol);
    case NonlinearKind::weighted_identity:
      return preimage_weighted_identity(F, y, feasibility_tol, 0);
    case NonlinearKind::quadratic_two:
      return preimage_quadratic_two(F, y, feasibility_tol);
    default:
      fail("unsupported-kind",
           "autoconvolution preimages require a known solution element; "
           "use autoconv_preimage_from_solution");
  }
}

PreimageSet autoconv_preimage_from_solution(const NonlinearOp& F, const GridFunction& xdag) {
  if (F.kind != NonlinearKind::autoconv_real && F.kind != NonlinearKind::autoconv_complex)
    fail("unsupported-kind", "expected an autoconvolution operator");
  PreimageSet set;
  set.points.push_back(xdag);
  if (F.kind == NonlinearKind::autoconv_complex) {
    set.points.push_back(-1.0 * xdag);
  }
  return set;
}

bool vanishes_near_zero(const GridFunction& y, double tol) {
  double scale = y.re().cwiseAbs().maxCoeff();
  if (y.is_complex()) scale = std::max(scale, y.im().cwiseAbs().maxCoeff());
  double head = std::abs(y.re()[0]);
  if (y.is_complex()) head = std::hypot(head, y.im()[0]);
  return head <= tol * (1.0 + scale);
}

double bilinear_bound_estimate(const NonlinearOp& F, int pairs, std::uint64_t seed) {
  Rng rng(seed);
  double c = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd ur = rng.gaussian_vector(F.domain.n);
    Eigen::VectorXd vr = rng.gaussian_vector(F.domain.n);
    GridFunction u = GridFunction::from_values(F.domain, std::move(ur));
    GridFunction v = GridFunction::from_values(F.domain, std::move(vr));
    const double nu = norm(u), nv = norm(v);
    if (nu == 0 || nv == 0) continue;
    c = std::max(c, norm(bilinear_eval(F, u, v)) / (nu * nv));
  }
  return c;
}

void write_preimage_csv(const PreimageSet& set, const std::string& path) {
  std::ostringstream os;
  os << "node,re\n";
  for (size_t p = 0; p < set.points.size(); ++p) {
    const GridFunction& f = set.points[p];
    if (p) os << "\n";
    for (int i = 0; i < f.size(); ++i) {
      os << fmt_sci(f.grid().node(i)) << ',' << fmt_sci(f.re()[i]);
      if (f.is_complex()) os << ',' << fmt_sci(f.im()[i]);
      os << '\n';
    }
  }
  write_file_atomic(path, os.str());

  nlohmann::json meta;
  meta["point_count"] = set.points.size();
  meta["in_range"] = set.in_range;
  meta["residual"] = set.residual;
  meta["has_subspace"] = set.subspace.has_value();
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& br : set.branches) {
    branches.push_back({{"index", br.index}, {"a", br.a}, {"b", br.b}});
  }
  meta["branches"] = branches;
  write_file_atomic(path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace illab
