#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "illab/nonlinear_op.hpp"
#include "illab/rng.hpp"

using namespace illab;

namespace {

double scalar_value(const GridFunction& f) { return f.re()[0]; }

}  // namespace

TEST_CASE("scalar rational map: known values") {
  const NonlinearOp F = NonlinearOp::scalar_rational();
  auto at = [&](double t) {
    return scalar_value(eval(F, GridFunction::constant(F.domain, t)));
  };
  CHECK(at(0.0) == 0.0);
  CHECK(at(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(at(-1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(at(2.0) == doctest::Approx(4.0 / 17.0).epsilon(1e-15));
}

TEST_CASE("scalar rational preimage matches the closed-form roots") {
  const NonlinearOp F = NonlinearOp::scalar_rational();
  // Roots of t^2/(1+t^4) = c: t^2 = (1 -+ sqrt(1-4c^2)) / (2c).
  for (double c : {0.1, 0.3, 0.45, 0.49}) {
    const double disc = std::sqrt(1.0 - 4.0 * c * c);
    const double inner_root = std::sqrt((1.0 - disc) / (2.0 * c));
    const double outer_root = std::sqrt((1.0 + disc) / (2.0 * c));
    const PreimageSet set = preimage(F, GridFunction::constant(F.domain, c));
    REQUIRE(set.points.size() == 4);
    CHECK(scalar_value(set.points[0]) == doctest::Approx(-outer_root).epsilon(1e-12));
    CHECK(scalar_value(set.points[1]) == doctest::Approx(-inner_root).epsilon(1e-12));
    CHECK(scalar_value(set.points[2]) == doctest::Approx(inner_root).epsilon(1e-12));
    CHECK(scalar_value(set.points[3]) == doctest::Approx(outer_root).epsilon(1e-12));
    for (const auto& p : set.points)
      CHECK(scalar_value(eval(F, p)) == doctest::Approx(c).epsilon(1e-13));
  }
}

TEST_CASE("scalar rational preimage boundary cases") {
  const NonlinearOp F = NonlinearOp::scalar_rational();
  const PreimageSet zero = preimage(F, GridFunction::constant(F.domain, 0.0));
  REQUIRE(zero.points.size() == 1);
  CHECK(scalar_value(zero.points[0]) == 0.0);

  const PreimageSet top = preimage(F, GridFunction::constant(F.domain, 0.5));
  REQUIRE(top.points.size() == 2);
  CHECK(scalar_value(top.points[0]) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(scalar_value(top.points[1]) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_FALSE(preimage(F, GridFunction::constant(F.domain, 0.6)).in_range);
  CHECK_FALSE(preimage(F, GridFunction::constant(F.domain, -0.1)).in_range);
}

TEST_CASE("weighted identity: evaluation and two-point preimage") {
  const Grid g = make_uniform_grid(128, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::weighted_identity(g);
  const GridFunction y = eval(F, GridFunction::constant(g, 3.0));
  CHECK(norm(y - GridFunction::constant(g, 9.0)) < 1e-12);  // psi(3*1) * 3 = 9

  const PreimageSet set = preimage(F, GridFunction::constant(g, 4.0));
  REQUIRE(set.points.size() == 2);
  CHECK(norm(set.points[0] - GridFunction::constant(g, 2.0)) < 1e-12);
  CHECK(norm(set.points[1] - GridFunction::constant(g, -2.0)) < 1e-12);
  for (const auto& p : set.points) CHECK(norm(eval(F, p) - GridFunction::constant(g, 4.0)) < 1e-12);

  CHECK_FALSE(preimage(F, GridFunction::constant(g, -1.0)).in_range);
}

TEST_CASE("weighted identity: preimage of zero is the mean-zero subspace") {
  const Grid g = make_uniform_grid(64, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::weighted_identity(g);
  const PreimageSet set = preimage(F, GridFunction::zero(g));
  REQUIRE(set.subspace.has_value());
  CHECK(set.subspace->basis.cols() == g.n - 1);
  // Every basis column has zero integral and every sampled point maps to 0.
  for (int j = 0; j < set.subspace->basis.cols(); ++j) {
    const GridFunction col = GridFunction::from_values(g, set.subspace->basis.col(j));
    CHECK(std::abs(mean_functional(col)) < 1e-12);
  }
  for (const auto& p : set.subspace->sample()) CHECK(norm(eval(F, p)) < 1e-10);
  // dist(1, N) = |integral of 1| / sqrt(length) = 1 on (0,1).
  CHECK(set.subspace->distance(GridFunction::constant(g, 1.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean-zero basis is L2-orthonormal") {
  const Grid g = make_uniform_grid(40, 0.0, 1.0);
  const SubspaceDescriptor N = mean_zero_subspace(g);
  const Eigen::MatrixXd gram = g.h * (N.basis.transpose() * N.basis);
  CHECK((gram - Eigen::MatrixXd::Identity(g.n - 1, g.n - 1)).norm() < 1e-12);
}

TEST_CASE("subspace distance agrees with an independent least-squares solve") {
  const Grid g = make_uniform_grid(25, 0.0, 1.0);
  Rng rng(19);
  SubspaceDescriptor sub;
  sub.anchor = GridFunction::from_values(g, rng.gaussian_vector(g.n));
  Eigen::MatrixXd raw(g.n, 3);
  for (int j = 0; j < 3; ++j) raw.col(j) = rng.gaussian_vector(g.n);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  sub.basis = Eigen::MatrixXd(qr.householderQ()).leftCols(3) / std::sqrt(g.h);

  for (int trial = 0; trial < 10; ++trial) {
    const GridFunction x = GridFunction::from_values(g, rng.gaussian_vector(g.n));
    const Eigen::VectorXd r = x.re() - sub.anchor.re();
    const Eigen::VectorXd coef =
        (sub.basis.transpose() * sub.basis).ldlt().solve(sub.basis.transpose() * r);
    const double expected = std::sqrt(g.h * (r - sub.basis * coef).squaredNorm());
    CHECK(sub.distance(x) == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("subspace sampling is seed-deterministic") {
  const Grid g = make_uniform_grid(16, 0.0, 1.0);
  SubspaceDescriptor a = mean_zero_subspace(g, 5);
  SubspaceDescriptor b = mean_zero_subspace(g, 5);
  const auto sa = a.sample(), sb = b.sample();
  REQUIRE(sa.size() == sb.size());
  for (size_t i = 0; i < sa.size(); ++i) CHECK((sa[i].re() - sb[i].re()).norm() == 0.0);
}

TEST_CASE("two-coefficient quadratic map: defining identities") {
  std::vector<double> sig(50);
  for (int k = 0; k < 50; ++k) sig[k] = 1.0 / (k + 1);
  const NonlinearOp F = NonlinearOp::quadratic_two(sig, 50);
  const GridFunction u1 = F.basis(1), u2 = F.basis(2);
  CHECK(norm(eval(F, u1) - u1) == 0.0);  // F(u1) = u1
  CHECK(norm(eval(F, u2) - u2) == 0.0);  // F(u2) = u2
  CHECK(norm(eval(F, F.basis(5))) == 0.0);  // orthogonal to u1,u2: F vanishes

  // F(u1 + r uk) = u1 + r sigma_k u_{k+1}, exactly at the grid level.
  const double r = 0.5;
  for (int k : {3, 10, 30}) {
    const GridFunction img = eval(F, u1 + r * F.basis(k));
    const GridFunction expect = u1 + (r * sig[k - 1]) * F.basis(k + 1);
    CHECK(norm(img - expect) < 1e-15);
  }
}

TEST_CASE("two-coefficient quadratic map: preimage branches solve the equation") {
  std::vector<double> sig(40);
  for (int k = 0; k < 40; ++k) sig[k] = 1.0 / (k + 1);
  const NonlinearOp F = NonlinearOp::quadratic_two(sig, 40);
  const GridFunction u1 = F.basis(1), u2 = F.basis(2);

  PreimageSet at_u1 = preimage(F, u1);
  REQUIRE(at_u1.points.size() == 2);
  CHECK(norm(at_u1.points[0] - u1) < 1e-12);
  CHECK(norm(at_u1.points[1] + u1) < 1e-12);

  PreimageSet at_u2 = preimage(F, u2);
  REQUIRE(at_u2.points.size() == 2);
  CHECK(norm(at_u2.points[0] - u2) < 1e-12);
  CHECK(norm(at_u2.points[1] + u2) < 1e-12);

  const GridFunction y = eval(F, u1 + 0.5 * F.basis(7));
  const PreimageSet set = preimage(F, y);
  REQUIRE(!set.points.empty());
  bool found = false;
  for (const auto& p : set.points) {
    CHECK(norm(eval(F, p) - y) < 1e-9);
    if (norm(p - (u1 + 0.5 * F.basis(7))) < 1e-9) found = true;
  }
  CHECK(found);

  GridFunction bad = GridFunction::zero(F.domain);
  bad.re()[0] = -1.0;
  CHECK_FALSE(preimage(F, bad).in_range);
}

TEST_CASE("real autoconvolution matches a direct double-sum oracle") {
  const Grid g = make_uniform_grid(50, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::autoconv_real(g);
  Rng rng(23);
  Eigen::VectorXd v = rng.gaussian_vector(g.n).cwiseAbs();
  const GridFunction x = GridFunction::from_values(g, v);
  const GridFunction y = eval(F, x);
  for (int i = 0; i < g.n; ++i) {
    double s = 0.0;
    for (int k = 0; k <= i; ++k)
      if (i - k < g.n) s += v[k] * v[i - k];
    CHECK(y.re()[i] == doctest::Approx(g.h * s).epsilon(1e-12));
  }
  GridFunction neg = x;
  neg.re()[3] = -1.0;
  CHECK_THROWS_AS(eval(F, neg), Error);
}

TEST_CASE("real autoconvolution of 1 approximates y(s) = s") {
  const Grid g = make_uniform_grid(400, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::autoconv_real(g);
  const GridFunction y = eval(F, GridFunction::constant(g, 1.0));
  for (int i = 0; i < g.n; i += 37)
    CHECK(y.re()[i] == doctest::Approx(g.node(i)).epsilon(0.01));
}

TEST_CASE("complex full autoconvolution: sign symmetry and hat function") {
  const Grid g = make_uniform_grid(200, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::autoconv_complex(g);
  CHECK(F.range.n == 400);
  CHECK(F.range.b == doctest::Approx(2.0));
  const GridFunction one = GridFunction::constant(g, 1.0);
  const GridFunction y = eval(F, one);
  // (1 * 1)(s) = min(s, 2 - s) on (0,2).
  for (int i = 0; i < F.range.n; i += 23) {
    const double s = F.range.node(i);
    CHECK(y.re()[i] == doctest::Approx(std::min(s, 2.0 - s)).epsilon(0.02));
  }
  const GridFunction y_neg = eval(F, -1.0 * one);
  CHECK(norm(y_neg - y) == 0.0);  // F(-x) = F(x)
}

TEST_CASE("autoconvolution bilinear form is symmetric and bounded") {
  const Grid g = make_uniform_grid(60, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::autoconv_complex(g);
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const GridFunction u = GridFunction::from_values(g, rng.gaussian_vector(g.n));
    const GridFunction v = GridFunction::from_values(g, rng.gaussian_vector(g.n));
    CHECK(norm(bilinear_eval(F, u, v) - bilinear_eval(F, v, u)) < 1e-13);
    CHECK(norm(bilinear_eval(F, u, v)) <= norm(u) * norm(v) * (1 + 1e-10));
  }
  CHECK(bilinear_bound_estimate(F, 200, 1) <= 1.0 + 1e-10);
}

TEST_CASE("autoconvolution preimages come from the solution element") {
  const Grid g = make_uniform_grid(32, 0.0, 1.0);
  const NonlinearOp Fr = NonlinearOp::autoconv_real(g);
  const NonlinearOp Fc = NonlinearOp::autoconv_complex(g);
  const GridFunction x = GridFunction::constant(g, 1.0);
  CHECK(autoconv_preimage_from_solution(Fr, x).points.size() == 1);
  CHECK(autoconv_preimage_from_solution(Fc, x).points.size() == 2);
  CHECK_THROWS_AS(preimage(Fr, eval(Fr, x)), Error);  // no blind deconvolution
}

TEST_CASE("vanishing-near-zero flag reads the leading cell") {
  const Grid g = make_uniform_grid(10, 0.0, 1.0);
  GridFunction y = GridFunction::constant(g, 1.0);
  CHECK_FALSE(vanishes_near_zero(y));
  y.re()[0] = 0.0;
  CHECK(vanishes_near_zero(y));
}

TEST_CASE("preimage csv writer emits points and a branch sidecar") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "illab_pre_test";
  fs::remove_all(dir);
  std::vector<double> sig(20);
  for (int k = 0; k < 20; ++k) sig[k] = 1.0 / (k + 1);
  const NonlinearOp F = NonlinearOp::quadratic_two(sig, 20);
  const PreimageSet set = preimage(F, F.basis(1));
  const std::string path = (dir / "pre.csv").string();
  write_preimage_csv(set, path);
  CHECK(fs::exists(path));
  std::ifstream meta(path + ".meta.json");
  nlohmann::json j;
  meta >> j;
  CHECK(j["point_count"] == 2);
  CHECK(j["in_range"] == true);
  CHECK(j["branches"].size() == 2);
  fs::remove_all(dir);
}
