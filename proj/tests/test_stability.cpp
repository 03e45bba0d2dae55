#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "illab/rng.hpp"
#include "illab/stability.hpp"

using namespace illab;

namespace {

PreimageSet points_on(const Grid& g, const std::vector<double>& values) {
  PreimageSet set;
  for (double v : values) set.points.push_back(GridFunction::constant(g, v));
  return set;
}

std::vector<double> sigma_one_over_k(int n) {
  std::vector<double> s(n);
  for (int k = 0; k < n; ++k) s[k] = 1.0 / (k + 1);
  return s;
}

}  // namespace

TEST_CASE("quasi-distance is not symmetric") {
  const Grid g = make_uniform_grid(1, 0.0, 1.0);
  const PreimageSet U = points_on(g, {0.0});
  const PreimageSet V = points_on(g, {0.0, 5.0});
  CHECK(qdist(U, V) == doctest::Approx(0.0));
  CHECK(qdist(V, U) == doctest::Approx(5.0));
  CHECK_THROWS_AS(qdist(PreimageSet{}, V), Error);
  CHECK_THROWS_AS(qdist(U, PreimageSet{}), Error);
}

TEST_CASE("quasi-distance agrees with a brute-force double loop on finite sets") {
  const Grid g = make_uniform_grid(12, 0.0, 1.0);
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    PreimageSet U, V;
    for (int i = 0; i < 4; ++i)
      U.points.push_back(GridFunction::from_values(g, rng.gaussian_vector(g.n)));
    for (int i = 0; i < 6; ++i)
      V.points.push_back(GridFunction::from_values(g, rng.gaussian_vector(g.n)));
    double sup = 0.0;
    for (const auto& u : U.points) {
      double best = 1e300;
      for (const auto& v : V.points) best = std::min(best, norm(u - v));
      sup = std::max(sup, best);
    }
    CHECK(qdist(U, V) == doctest::Approx(sup).epsilon(1e-13));
  }
}

TEST_CASE("quasi-distance satisfies the triangle inequality on random sets") {
  const Grid g = make_uniform_grid(8, 0.0, 1.0);
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    PreimageSet U, V, W;
    for (int i = 0; i < 3; ++i) {
      U.points.push_back(GridFunction::from_values(g, rng.gaussian_vector(g.n)));
      V.points.push_back(GridFunction::from_values(g, rng.gaussian_vector(g.n)));
      W.points.push_back(GridFunction::from_values(g, rng.gaussian_vector(g.n)));
    }
    CHECK(qdist(U, W) <= qdist(U, V) + qdist(V, W) + 1e-12);
  }
}

TEST_CASE("quasi-distance with a subspace side uses exact projection") {
  const Grid g = make_uniform_grid(32, 0.0, 1.0);
  PreimageSet V;
  V.points.push_back(GridFunction::zero(g));
  V.subspace = mean_zero_subspace(g);
  PreimageSet U;
  U.points.push_back(GridFunction::constant(g, 2.0));
  // dist(2*1, N) = 2 on (0,1); the point 0 is equally far.
  CHECK(qdist(U, V) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("linear preimage: pseudoinverse point plus nullspace subspace") {
  Eigen::VectorXd s(6);
  s << 1.0, 1.0, 0.0, 0.0, 0.0, 0.0;
  const StabilityProblem prob = make_problem(make_diagonal(s));
  Eigen::VectorXd yv = Eigen::VectorXd::Zero(6);
  yv[0] = 2.0;
  yv[1] = -3.0;
  const GridFunction y = GridFunction::from_values(prob.linear->range, yv);
  const PreimageSet set = prob.solve_preimage(y);
  REQUIRE(set.points.size() == 1);
  CHECK(set.points[0].re()[0] == doctest::Approx(2.0));
  CHECK(set.points[0].re()[1] == doctest::Approx(-3.0));
  REQUIRE(set.subspace.has_value());
  CHECK(set.subspace->basis.cols() == 4);

  Eigen::VectorXd bad = yv;
  bad[4] = 1.0;  // outside the range
  CHECK_FALSE(prob.solve_preimage(GridFunction::from_values(prob.linear->range, bad)).in_range);
}

TEST_CASE("rank-deficient diagonal: quasi-distance equals the pseudoinverse gap") {
  Eigen::VectorXd s(10);
  s << 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  const LinearOp A = make_diagonal(s);
  const StabilityProblem prob = make_problem(A);
  const SvdFactors& f = *prob.linear_svd;

  Eigen::VectorXd yv = Eigen::VectorXd::Zero(10);
  yv[0] = 1.0;
  const GridFunction y = GridFunction::from_values(A.range, yv);
  const PreimageSet base = prob.solve_preimage(y);

  for (int n = 1; n <= 8; ++n) {
    const GridFunction yn =
        y + std::pow(10.0, -n) * GridFunction::from_values(A.range, f.left.col(0));
    const PreimageSet Pn = prob.solve_preimage(yn);
    const double expected =
        norm(pseudoinverse_apply(f, yn, 1e-12) - pseudoinverse_apply(f, y, 1e-12));
    CHECK(qdist(Pn, base) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("image-space probe: scalar rational map is unstable at zero") {
  const StabilityProblem prob = make_problem(NonlinearOp::scalar_rational());
  const GridFunction y = GridFunction::zero(prob.nonlinear->domain);
  const ProbeReport rep = probe_stable_solvability(prob, y, SequenceSpec{});
  CHECK(rep.verdict == "unstable");
  CHECK(rep.witness == "shrink-plus");
  // Distances blow up as the data gap shrinks.
  REQUIRE(rep.steps.size() >= 4);
  CHECK(rep.steps.back().output_gap > 100.0 * rep.steps.front().output_gap);
}

TEST_CASE("image-space probe: weighted identity is stable at zero") {
  const Grid g = make_uniform_grid(100, 0.0, 1.0);
  const StabilityProblem prob = make_problem(NonlinearOp::weighted_identity(g));
  const ProbeReport rep =
      probe_stable_solvability(prob, GridFunction::zero(g), SequenceSpec{});
  CHECK(rep.verdict == "stable");
  // The constant family realizes distance 1/sqrt(n) at data gap 1/n.
  bool found = false;
  for (const auto& fam : rep.families) {
    if (fam.label != "harmonic-constant") continue;
    found = true;
    for (const auto& st : fam.steps)
      CHECK(st.output_gap ==
            doctest::Approx(std::sqrt(st.input_gap)).epsilon(1e-10));
  }
  CHECK(found);
}

TEST_CASE("image-space probe: quadratic map unstable at u1, stable at u2") {
  const int dim = 120;
  const NonlinearOp F = NonlinearOp::quadratic_two(sigma_one_over_k(dim), dim);
  const StabilityProblem prob = make_problem(F);

  const ProbeReport at_u1 = probe_stable_solvability(prob, F.basis(1), SequenceSpec{});
  CHECK(at_u1.verdict == "unstable");
  CHECK(at_u1.witness == "escaping-spectrum");
  for (const auto& st : at_u1.steps)
    CHECK(st.output_gap == doctest::Approx(0.5).epsilon(1e-10));  // radius r

  const ProbeReport at_u2 = probe_stable_solvability(prob, F.basis(2), SequenceSpec{});
  CHECK(at_u2.verdict == "stable");
}

TEST_CASE("image-space probe: diagonal decay unstable, identity stable") {
  Eigen::VectorXd s(100);
  for (int k = 0; k < 100; ++k) s[k] = 1.0 / (k + 1);
  const StabilityProblem decay = make_problem(make_diagonal(s));
  const GridFunction y = apply(*decay.linear, GridFunction::constant(decay.linear->domain, 1.0));
  CHECK(probe_stable_solvability(decay, y, SequenceSpec{}).verdict == "unstable");

  const Grid g = make_uniform_grid(100, 0.0, 1.0);
  const StabilityProblem id = make_problem(make_identity(g));
  const GridFunction yi = GridFunction::constant(g, 1.0);
  CHECK(probe_stable_solvability(id, yi, SequenceSpec{}).verdict == "stable");
}

TEST_CASE("image-space probe: real autoconvolution unstable via endpoint bumps") {
  const Grid g = make_uniform_grid(200, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::autoconv_real(g);
  const GridFunction xdag = GridFunction::constant(g, 1.0);
  const StabilityProblem prob = make_problem(F, xdag);
  const ProbeReport rep =
      probe_stable_solvability(prob, eval(F, xdag), SequenceSpec{});
  CHECK(rep.verdict == "unstable");
  CHECK(rep.witness == "escaping-endpoint-bump");
}

TEST_CASE("solution-space probe: scalar rational map is well posed everywhere") {
  const StabilityProblem prob = make_problem(NonlinearOp::scalar_rational());
  for (double t : {0.0, 0.7, 1.0, -1.0, 2.0}) {
    const ProbeReport rep = probe_local_posedness(
        prob, GridFunction::constant(prob.nonlinear->domain, t), SequenceSpec{});
    CHECK(rep.verdict == "well_posed");
  }
}

TEST_CASE("solution-space probe: weighted identity ill posed exactly on the kernel") {
  const Grid g = make_uniform_grid(100, 0.0, 1.0);
  const StabilityProblem prob = make_problem(NonlinearOp::weighted_identity(g));

  const ProbeReport at_zero =
      probe_local_posedness(prob, GridFunction::zero(g), SequenceSpec{});
  CHECK(at_zero.verdict == "ill_posed");
  CHECK(at_zero.witness == "escaping-mean-zero");

  // A mean-zero element other than 0 is also a kernel point.
  SubspaceDescriptor N = mean_zero_subspace(g);
  const GridFunction w = GridFunction::from_values(g, N.basis.col(3));
  CHECK(probe_local_posedness(prob, w, SequenceSpec{}).verdict == "ill_posed");

  // Away from the kernel the probe finds no witness.
  CHECK(probe_local_posedness(prob, GridFunction::constant(g, 1.0), SequenceSpec{}).verdict ==
        "well_posed");
}

TEST_CASE("solution-space probe: quadratic map ill posed at u1, well posed at u2") {
  const int dim = 120;
  const NonlinearOp F = NonlinearOp::quadratic_two(sigma_one_over_k(dim), dim);
  const StabilityProblem prob = make_problem(F);

  const ProbeReport at_u1 = probe_local_posedness(prob, F.basis(1), SequenceSpec{});
  CHECK(at_u1.verdict == "ill_posed");
  CHECK(at_u1.witness == "escaping-spectrum");
  // Witness rows: ||x_n - u1|| = r while ||F(x_n) - F(u1)|| = r sigma_k.
  for (const auto& st : at_u1.steps) {
    CHECK(st.output_gap == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(st.input_gap == doctest::Approx(0.5 / st.index).epsilon(1e-12));
  }

  CHECK(probe_local_posedness(prob, F.basis(2), SequenceSpec{}).verdict == "well_posed");
}

TEST_CASE("solution-space probe: compact linear operators are ill posed, identity is not") {
  Eigen::VectorXd s(100);
  for (int k = 0; k < 100; ++k) s[k] = 1.0 / (k + 1);
  const StabilityProblem decay = make_problem(make_diagonal(s));
  const GridFunction x = GridFunction::constant(decay.linear->domain, 1.0);
  CHECK(probe_local_posedness(decay, x, SequenceSpec{}).verdict == "ill_posed");

  const Grid g = make_uniform_grid(100, 0.0, 1.0);
  const StabilityProblem vol = make_problem(make_volterra(g));
  CHECK(probe_local_posedness(vol, GridFunction::constant(g, 1.0), SequenceSpec{}).verdict ==
        "ill_posed");

  const StabilityProblem id = make_problem(make_identity(g));
  CHECK(probe_local_posedness(id, GridFunction::constant(g, 1.0), SequenceSpec{}).verdict ==
        "well_posed");
}

TEST_CASE("solution-space probe: autoconvolution witness depends on the family") {
  const Grid g = make_uniform_grid(200, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::autoconv_real(g);
  const StabilityProblem prob = make_problem(F);
  const GridFunction xdag = GridFunction::constant(g, 1.0);

  SequenceSpec bump;
  bump.direction_family = "bump";
  CHECK(probe_local_posedness(prob, xdag, bump).verdict == "ill_posed");

  // The oscillation family keeps a fixed share of its energy in the image and
  // certifies nothing; the probe then reports the falsifiability default.
  SequenceSpec osc;
  osc.direction_family = "oscillatory";
  const ProbeReport rep = probe_local_posedness(prob, xdag, osc);
  CHECK(rep.verdict == "well_posed");
  for (const auto& fam : rep.families) {
    if (fam.label != "escaping-oscillation") continue;
    CHECK(fam.status == "no-witness");
    CHECK(fam.steps.back().input_gap > 0.1 * fam.steps.front().input_gap);
  }
}

TEST_CASE("complex autoconvolution probe handles the sign-pair preimage") {
  const Grid g = make_uniform_grid(100, 0.0, 1.0);
  const NonlinearOp F = NonlinearOp::autoconv_complex(g);
  const GridFunction xdag = GridFunction::constant(g, 1.0);
  const StabilityProblem prob = make_problem(F, xdag);
  const ProbeReport rep =
      probe_stable_solvability(prob, eval(F, xdag), SequenceSpec{});
  CHECK(rep.verdict == "unstable");
}

TEST_CASE("probe reports are deterministic and serialize with a verdict line") {
  namespace fs = std::filesystem;
  const Grid g = make_uniform_grid(80, 0.0, 1.0);
  const StabilityProblem prob = make_problem(NonlinearOp::weighted_identity(g));
  const ProbeReport a =
      probe_local_posedness(prob, GridFunction::zero(g), SequenceSpec{});
  const ProbeReport b =
      probe_local_posedness(prob, GridFunction::zero(g), SequenceSpec{});
  REQUIRE(a.families.size() == b.families.size());
  for (size_t i = 0; i < a.families.size(); ++i) {
    CHECK(a.families[i].status == b.families[i].status);
    REQUIRE(a.families[i].steps.size() == b.families[i].steps.size());
    for (size_t j = 0; j < a.families[i].steps.size(); ++j) {
      CHECK(a.families[i].steps[j].input_gap == b.families[i].steps[j].input_gap);
      CHECK(a.families[i].steps[j].output_gap == b.families[i].steps[j].output_gap);
    }
  }

  const fs::path dir = fs::temp_directory_path() / "illab_probe_test";
  fs::remove_all(dir);
  const std::string p1 = (dir / "a.csv").string(), p2 = (dir / "b.csv").string();
  write_probe_csv(a, p1);
  write_probe_csv(b, p2);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  const std::string c1 = slurp(p1);
  CHECK(c1 == slurp(p2));
  CHECK(c1.find("verdict,ill_posed") != std::string::npos);
  CHECK(c1.find("n,input_gap,output_gap") != std::string::npos);
  fs::remove_all(dir);
}
