#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <iosfwd>
#include <string>

#include "illab/errors.hpp"

namespace illab {

// Uniform cell grid over (a, b) with midpoint nodes a + (i + 1/2) h.
struct Grid {
  int n = 0;
  double a = 0.0;
  double b = 0.0;
  double h = 0.0;

  double node(int i) const { return a + (i + 0.5) * h; }
  double length() const { return b - a; }

  friend bool operator==(const Grid& lhs, const Grid& rhs) {
    return lhs.n == rhs.n && lhs.a == rhs.a && lhs.b == rhs.b;
  }
};

Grid make_uniform_grid(int n, double a, double b);

// A sampled element of L2 over an interval. Complex values are stored as
// paired real channels; the imaginary channel is empty for real functions.
class GridFunction {
 public:
  GridFunction() = default;

  static GridFunction zero(const Grid& grid, bool complex_channel = false);
  static GridFunction constant(const Grid& grid, double value);
  static GridFunction from_values(const Grid& grid, Eigen::VectorXd re);
  static GridFunction from_values(const Grid& grid, Eigen::VectorXd re, Eigen::VectorXd im);
  static GridFunction sample(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const { return grid_; }
  bool is_complex() const { return complex_; }
  const Eigen::VectorXd& re() const { return re_; }
  const Eigen::VectorXd& im() const { return im_; }
  Eigen::VectorXd& re() { return re_; }
  Eigen::VectorXd& im() { return im_; }
  int size() const { return static_cast<int>(re_.size()); }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double scale);

  friend GridFunction operator+(GridFunction lhs, const GridFunction& rhs) { return lhs += rhs; }
  friend GridFunction operator-(GridFunction lhs, const GridFunction& rhs) { return lhs -= rhs; }
  friend GridFunction operator*(double scale, GridFunction f) { return f *= scale; }

 private:
  Grid grid_;
  Eigen::VectorXd re_;
  Eigen::VectorXd im_;  // empty unless complex_
  bool complex_ = false;
};

// Midpoint-quadrature inner product h * sum u_i conj(v_i).
std::complex<double> inner(const GridFunction& u, const GridFunction& v);
double norm(const GridFunction& u);

// Zero-extension onto a larger commensurate grid.
GridFunction embed(const GridFunction& u, const Grid& target);

// CSV with columns node,re[,im].
void write_csv(const GridFunction& u, std::ostream& os);
void write_csv_file(const GridFunction& u, const std::string& path);

}  // namespace illab
