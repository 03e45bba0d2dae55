#include "illab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "illab/report_io.hpp"

namespace illab {

Grid make_uniform_grid(int n, double a, double b) {
  if (n < 1) fail("zero-size", "grid needs at least one cell");
  if (!(a < b)) fail("invalid-interval", "need a < b");
  return Grid{n, a, b, (b - a) / n};
}

GridFunction GridFunction::zero(const Grid& grid, bool complex_channel) {
  GridFunction f;
  f.grid_ = grid;
  f.re_ = Eigen::VectorXd::Zero(grid.n);
  f.complex_ = complex_channel;
  if (complex_channel) f.im_ = Eigen::VectorXd::Zero(grid.n);
  return f;
}

GridFunction GridFunction::constant(const Grid& grid, double value) {
  GridFunction f = zero(grid);
  f.re_.setConstant(value);
  return f;
}

GridFunction GridFunction::from_values(const Grid& grid, Eigen::VectorXd re) {
  if (re.size() != grid.n) fail("grid-mismatch", "value count does not match grid");
  GridFunction f;
  f.grid_ = grid;
  f.re_ = std::move(re);
  return f;
}

GridFunction GridFunction::from_values(const Grid& grid, Eigen::VectorXd re, Eigen::VectorXd im) {
  if (re.size() != grid.n || im.size() != grid.n)
    fail("grid-mismatch", "value count does not match grid");
  GridFunction f;
  f.grid_ = grid;
  f.re_ = std::move(re);
  f.im_ = std::move(im);
  f.complex_ = true;
  return f;
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(double)>& fn) {
  GridFunction f = zero(grid);
  for (int i = 0; i < grid.n; ++i) f.re_[i] = fn(grid.node(i));
  return f;
}

namespace {
void require_compatible(const GridFunction& u, const GridFunction& v) {
  if (!(u.grid() == v.grid()) || u.is_complex() != v.is_complex())
    fail("grid-mismatch", "operands live on different grids or channels");
}
}  // namespace

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_compatible(*this, other);
  re_ += other.re_;
  if (complex_) im_ += other.im_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_compatible(*this, other);
  re_ -= other.re_;
  if (complex_) im_ -= other.im_;
  return *this;
}

GridFunction& GridFunction::operator*=(double scale) {
  re_ *= scale;
  if (complex_) im_ *= scale;
  return *this;
}

std::complex<double> inner(const GridFunction& u, const GridFunction& v) {
  require_compatible(u, v);
  const double h = u.grid().h;
  if (!u.is_complex()) return {h * u.re().dot(v.re()), 0.0};
  // h * sum (ur + i ui)(vr - i vi)
  const double re = h * (u.re().dot(v.re()) + u.im().dot(v.im()));
  const double im = h * (u.im().dot(v.re()) - u.re().dot(v.im()));
  return {re, im};
}

double norm(const GridFunction& u) {
  double s = u.re().squaredNorm();
  if (u.is_complex()) s += u.im().squaredNorm();
  return std::sqrt(u.grid().h * s);
}

GridFunction embed(const GridFunction& u, const Grid& target) {
  const Grid& src = u.grid();
  if (std::abs(src.h - target.h) > 1e-12 * target.h)
    fail("incompatible-grids", "cell widths differ");
  if (src.a < target.a - 1e-12 * target.h || src.b > target.b + 1e-12 * target.h)
    fail("incompatible-grids", "source interval not contained in target");
  const double off = (src.a - target.a) / target.h;
  const int offset = static_cast<int>(std::lround(off));
  if (std::abs(off - offset) > 1e-9) fail("incompatible-grids", "grids are not aligned");

  GridFunction out = GridFunction::zero(target, u.is_complex());
  out.re().segment(offset, src.n) = u.re();
  if (u.is_complex()) out.im().segment(offset, src.n) = u.im();
  return out;
}

void write_csv(const GridFunction& u, std::ostream& os) {
  os << (u.is_complex() ? "node,re,im\n" : "node,re\n");
  for (int i = 0; i < u.size(); ++i) {
    os << fmt_sci(u.grid().node(i)) << ',' << fmt_sci(u.re()[i]);
    if (u.is_complex()) os << ',' << fmt_sci(u.im()[i]);
    os << '\n';
  }
}

void write_csv_file(const GridFunction& u, const std::string& path) {
  std::ostringstream oss;
  write_csv(u, oss);
  write_file_atomic(path, oss.str());
}

}  // namespace illab
