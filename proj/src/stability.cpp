#include "illab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "illab/report_io.hpp"
#include "illab/rng.hpp"

namespace illab {

namespace {

GridFunction promote(const GridFunction& f, bool complex_channel) {
  if (f.is_complex() || !complex_channel) return f;
  return GridFunction::from_values(f.grid(), f.re(), Eigen::VectorXd::Zero(f.size()));
}

double point_distance(const GridFunction& u, const GridFunction& v) {
  const bool cplx = u.is_complex() || v.is_complex();
  return norm(promote(u, cplx) - promote(v, cplx));
}

double distance_to_set(const GridFunction& u, const PreimageSet& V) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : V.points) best = std::min(best, point_distance(u, v));
  if (V.subspace && !u.is_complex()) best = std::min(best, V.subspace->distance(u));
  return best;
}

}  // namespace

double qdist(const PreimageSet& U, const PreimageSet& V) {
  if (U.empty()) fail("empty-source", "quasi-distance needs a nonempty source set");
  if (V.empty()) fail("empty-target", "quasi-distance needs a nonempty target set");
  double sup = 0.0;
  for (const auto& u : U.points) sup = std::max(sup, distance_to_set(u, V));
  if (U.subspace) {
    for (const auto& u : U.subspace->sample()) sup = std::max(sup, distance_to_set(u, V));
  }
  return sup;
}

GridFunction StabilityProblem::forward(const GridFunction& x) const {
  if (nonlinear) return eval(*nonlinear, x);
  if (linear) return apply(*linear, x);
  fail("empty-problem", "problem holds no operator");
}

PreimageSet StabilityProblem::solve_preimage(const GridFunction& y) const {
  if (nonlinear) {
    if (nonlinear->kind == NonlinearKind::autoconv_real ||
        nonlinear->kind == NonlinearKind::autoconv_complex) {
      if (!known_solution)
        fail("unsupported-kind", "autoconvolution preimages need a known solution element");
      const GridFunction fx = forward(*known_solution);
      if (point_distance(fx, y) > feasibility_tol * (1.0 + norm(y)))
        fail("inconsistent-solution", "known solution does not map to the requested data");
      return autoconv_preimage_from_solution(*nonlinear, *known_solution);
    }
    return preimage(*nonlinear, y, feasibility_tol);
  }
  if (!linear || !linear_svd) fail("empty-problem", "problem holds no operator");

  const SvdFactors& f = *linear_svd;
  const double smax = f.singular_values.size() ? f.singular_values[0] : 0.0;
  const double cutoff = 1e-12 * smax;
  GridFunction x = pseudoinverse_apply(f, y, cutoff);

  PreimageSet set;
  const GridFunction res = apply(*linear, x) - y;
  set.residual = norm(res);
  if (set.residual > feasibility_tol * (1.0 + norm(y))) {
    set.in_range = false;
    return set;
  }
  set.points.push_back(x);

  std::vector<int> nullcols;
  for (int j = 0; j < f.right.cols(); ++j) {
    const double s = j < f.singular_values.size() ? f.singular_values[j] : 0.0;
    if (s <= cutoff) nullcols.push_back(j);
  }
  if (!nullcols.empty()) {
    SubspaceDescriptor sub;
    sub.anchor = set.points.front();
    sub.basis.resize(f.right.rows(), static_cast<int>(nullcols.size()));
    for (size_t j = 0; j < nullcols.size(); ++j)
      sub.basis.col(static_cast<int>(j)) = f.right.col(nullcols[j]) / std::sqrt(f.domain.h);
    set.subspace = std::move(sub);
  }
  return set;
}

StabilityProblem make_problem(const NonlinearOp& op) {
  StabilityProblem p;
  p.nonlinear = op;
  return p;
}

StabilityProblem make_problem(const NonlinearOp& op, const GridFunction& xdag) {
  StabilityProblem p;
  p.nonlinear = op;
  p.known_solution = xdag;
  return p;
}

StabilityProblem make_problem(const LinearOp& op) {
  StabilityProblem p;
  p.linear = op;
  p.linear_svd = svd(op);
  return p;
}

namespace {

std::vector<int> geometric_indices(int lo, int hi, int count) {
  std::vector<int> out;
  if (hi < lo || count < 1) return out;
  for (int j = 0; j < count; ++j) {
    const double t = count == 1 ? 0.0 : static_cast<double>(j) / (count - 1);
    int k = static_cast<int>(
        std::llround(lo * std::pow(static_cast<double>(hi) / lo, t)));
    k = std::clamp(k, lo, hi);
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

GridFunction normalized(GridFunction f) {
  const double n = norm(f);
  if (n == 0.0) fail("zero-direction", "cannot normalize the zero element");
  f *= 1.0 / n;
  return f;
}

GridFunction unit_constant(const Grid& g) {
  return GridFunction::constant(g, 1.0 / std::sqrt(g.length()));
}

// Normalized indicator of the right endpoint window (1 - 1/m, 1).
GridFunction endpoint_bump(const Grid& g, int m) {
  GridFunction f = GridFunction::zero(g);
  const double left = 1.0 - 1.0 / m;
  for (int i = 0; i < g.n; ++i)
    if (g.node(i) > left) f.re()[i] = 1.0;
  return normalized(std::move(f));
}

GridFunction oscillation(const Grid& g, int m) {
  GridFunction f =
      GridFunction::sample(g, [m](double t) { return std::sin(2.0 * M_PI * m * t); });
  return normalized(std::move(f));
}

struct Candidate {
  int index = 0;
  GridFunction y;
  std::optional<PreimageSet> pre;  // pre-built preimage (autoconvolution)
};

struct FamilySpec {
  std::string label;
  std::vector<Candidate> cands;
};

bool real_domain_ok(const NonlinearOp& op, const GridFunction& x) {
  return op.kind != NonlinearKind::autoconv_real || !(x.re().array() < 0.0).any();
}

std::vector<FamilySpec> image_families(const StabilityProblem& problem, const GridFunction& y,
                                       const PreimageSet& base, const SequenceSpec& spec) {
  std::vector<FamilySpec> fams;
  const int len = spec.length;
  const double r = spec.radius;

  if (problem.nonlinear) {
    const NonlinearOp& op = *problem.nonlinear;
    switch (op.kind) {
      case NonlinearKind::scalar_rational: {
        const double c = y.re()[0];
        for (double sign : {1.0, -1.0}) {
          FamilySpec fam;
          fam.label = sign > 0 ? "shrink-plus" : "shrink-minus";
          for (int n = 1; n <= len; ++n)
            fam.cands.push_back(
                {n, GridFunction::constant(op.domain, c + sign * std::pow(10.0, -n)), {}});
          fams.push_back(std::move(fam));
        }
        break;
      }
      case NonlinearKind::weighted_identity: {
        FamilySpec ones;
        ones.label = "harmonic-constant";
        const GridFunction one = GridFunction::constant(op.domain, 1.0);
        for (int n = 1; n <= len; ++n) ones.cands.push_back({n, y + (1.0 / n) * one, {}});
        fams.push_back(std::move(ones));

        // Seeded mean-zero perturbation; leaves the integral of y untouched.
        SubspaceDescriptor N = mean_zero_subspace(op.domain, spec.seed);
        Rng rng(spec.seed + 1);
        Eigen::VectorXd coef = rng.gaussian_vector(static_cast<int>(N.basis.cols()));
        GridFunction q =
            normalized(GridFunction::from_values(op.domain, N.basis * coef));
        FamilySpec mz;
        mz.label = "harmonic-mean-zero";
        for (int n = 1; n <= len; ++n) mz.cands.push_back({n, y + (1.0 / n) * q, {}});
        fams.push_back(std::move(mz));
        break;
      }
      case NonlinearKind::quadratic_two: {
        const GridFunction& x0 = base.points.front();
        FamilySpec shrink;
        shrink.label = "shrinking-direction";
        for (int n = 1; n <= len; ++n) {
          const GridFunction xn = x0 + std::pow(2.0, -n) * op.basis(5);
          shrink.cands.push_back({n, eval(op, xn), {}});
        }
        fams.push_back(std::move(shrink));

        FamilySpec esc;
        esc.label = "escaping-spectrum";
        for (int k : geometric_indices(3, op.dim - 2, len)) {
          const GridFunction xk = x0 + r * op.basis(k);
          esc.cands.push_back({k, eval(op, xk), {}});
        }
        fams.push_back(std::move(esc));
        break;
      }
      case NonlinearKind::autoconv_real:
      case NonlinearKind::autoconv_complex: {
        const GridFunction& x0 = *problem.known_solution;
        auto with_solution = [&](const GridFunction& xn) {
          return autoconv_preimage_from_solution(op, xn);
        };
        FamilySpec shrink;
        shrink.label = "shrinking-constant";
        const GridFunction e = unit_constant(op.domain);
        for (int n = 1; n <= len; ++n) {
          const GridFunction xn = x0 + std::pow(2.0, -n) * promote(e, x0.is_complex());
          if (!real_domain_ok(op, xn)) continue;
          shrink.cands.push_back({n, eval(op, xn), with_solution(xn)});
        }
        fams.push_back(std::move(shrink));

        const bool use_bump = spec.direction_family != "oscillatory";
        const bool use_osc =
            spec.direction_family == "oscillatory" || spec.direction_family == "auto";
        const int n_cells = op.domain.n;
        if (use_bump) {
          FamilySpec esc;
          esc.label = "escaping-endpoint-bump";
          for (int m : geometric_indices(std::min(4, std::max(2, n_cells / 2)),
                                         std::min(64, std::max(2, n_cells / 2)), len)) {
            const GridFunction xm =
                x0 + r * promote(endpoint_bump(op.domain, m), x0.is_complex());
            if (!real_domain_ok(op, xm)) continue;
            esc.cands.push_back({m, eval(op, xm), with_solution(xm)});
          }
          fams.push_back(std::move(esc));
        }
        if (use_osc) {
          FamilySpec esc;
          esc.label = "escaping-oscillation";
          for (int m : geometric_indices(std::min(4, std::max(1, n_cells / 4)),
                                         std::min(64, std::max(1, n_cells / 4)), len)) {
            const GridFunction xm =
                x0 + r * promote(oscillation(op.domain, m), x0.is_complex());
            if (!real_domain_ok(op, xm)) continue;
            esc.cands.push_back({m, eval(op, xm), with_solution(xm)});
          }
          fams.push_back(std::move(esc));
        }
        break;
      }
    }
    return fams;
  }

  const SvdFactors& f = *problem.linear_svd;
  const double smax = f.singular_values.size() ? f.singular_values[0] : 0.0;
  const double cutoff = 1e-12 * smax;
  int rank = 0;
  while (rank < f.singular_values.size() && f.singular_values[rank] > cutoff) ++rank;
  const double hr = std::sqrt(f.range.h);

  auto left_dir = [&](int k) {  // k is 1-based
    return GridFunction::from_values(f.range, f.left.col(k - 1) / hr);
  };

  FamilySpec shrink;
  shrink.label = "shrink-leading";
  if (rank >= 1) {
    const GridFunction u1 = left_dir(1);
    for (int n = 1; n <= len; ++n)
      shrink.cands.push_back({n, y + std::pow(10.0, -n) * u1, {}});
  }
  fams.push_back(std::move(shrink));

  FamilySpec esc;
  esc.label = "escaping-spectrum";
  for (int k : geometric_indices(1, rank, len))
    esc.cands.push_back({k, y + f.singular_values[k - 1] * left_dir(k), {}});
  fams.push_back(std::move(esc));
  return fams;
}

std::string classify_image_family(const std::vector<ProbeStep>& steps,
                                  const ProbeThresholds& th, double scale, bool& considered) {
  considered = false;
  const double g0 = steps.front().input_gap, g1 = steps.back().input_gap;
  const double d0 = steps.front().output_gap, d1 = steps.back().output_gap;
  if (!(g1 <= th.gap_shrink_required * g0)) return "skipped-nonconvergent";
  considered = true;

  const double stable_abs = th.stable_tol * scale;
  if (d1 <= stable_abs) return "stable";
  if (d1 >= th.divergence_factor * std::max(d0, stable_abs) && g1 <= 1e-3 * g0)
    return "diverging";
  if (d1 >= 0.5 * d0) return "bounded-away";

  // Distances shrink; accept when they co-decrease at a genuine power rate.
  std::vector<double> gs, ds;
  for (const auto& st : steps)
    if (st.input_gap > 0 && st.output_gap > 0) {
      gs.push_back(st.input_gap);
      ds.push_back(st.output_gap);
    }
  if (gs.size() >= 3) {
    const LineFit fit = loglog_fit(gs, ds);
    if (fit.slope >= 0.1 && fit.r2 >= 0.9 && d1 <= 0.5 * d0) return "stable";
  }
  return "inconclusive";
}

}  // namespace

ProbeReport probe_stable_solvability(const StabilityProblem& problem, const GridFunction& y,
                                     const SequenceSpec& spec, const ProbeThresholds& th) {
  PreimageSet base = problem.solve_preimage(y);
  if (base.empty() || !base.in_range)
    fail("empty-target", "the probe target has no preimage");

  double scale = 1.0;
  for (const auto& p : base.points) scale = std::max(scale, 1.0 + norm(p));

  ProbeReport report;
  report.kind = "stable_solvability";
  report.note =
      "witness-based probe: 'unstable' exhibits a concrete in-range sequence; "
      "'stable' only records that every canonical family behaved stably";

  for (const FamilySpec& fam : image_families(problem, y, base, spec)) {
    FamilyResult res;
    res.label = fam.label;
    for (const Candidate& cand : fam.cands) {
      PreimageSet P = cand.pre ? *cand.pre : problem.solve_preimage(cand.y);
      if (P.empty() || !P.in_range) continue;
      ProbeStep st;
      st.index = cand.index;
      st.input_gap = point_distance(cand.y, y);
      st.output_gap = qdist(P, base);
      res.steps.push_back(st);
    }
    if (res.steps.size() < 4) {
      res.status = "skipped-insufficient";
    } else {
      res.status = classify_image_family(res.steps, th, scale, res.considered);
    }
    report.families.push_back(std::move(res));
  }

  const FamilyResult* decisive = nullptr;
  for (const auto& f : report.families) {
    if (f.status == "diverging" || f.status == "bounded-away") {
      decisive = &f;
      break;
    }
  }
  if (decisive) {
    report.verdict = "unstable";
    report.witness = decisive->label;
  } else {
    bool any = false, all_stable = true;
    for (const auto& f : report.families) {
      if (!f.considered) continue;
      any = true;
      if (f.status != "stable") all_stable = false;
      if (!decisive) decisive = &f;
    }
    report.verdict = (any && all_stable) ? "stable" : "inconclusive";
  }
  if (decisive) report.steps = decisive->steps;
  return report;
}

namespace {

struct DirectionFamily {
  std::string label;
  bool escaping = false;  // fixed radius r, varying direction index
  std::vector<std::pair<int, GridFunction>> directions;
};

std::vector<DirectionFamily> solution_families(const StabilityProblem& problem,
                                               const SequenceSpec& spec) {
  std::vector<DirectionFamily> fams;
  const int len = spec.length;

  auto shrink = [&](const std::string& label, const GridFunction& d) {
    DirectionFamily f;
    f.label = label;
    for (int n = 1; n <= len; ++n) f.directions.push_back({n, d});
    fams.push_back(std::move(f));
  };

  if (problem.nonlinear) {
    const NonlinearOp& op = *problem.nonlinear;
    switch (op.kind) {
      case NonlinearKind::scalar_rational:
        shrink("shrink-plus", GridFunction::constant(op.domain, 1.0));
        shrink("shrink-minus", GridFunction::constant(op.domain, -1.0));
        break;
      case NonlinearKind::weighted_identity: {
        shrink("shrink-constant", unit_constant(op.domain));
        SubspaceDescriptor N = mean_zero_subspace(op.domain, spec.seed);
        DirectionFamily esc;
        esc.label = "escaping-mean-zero";
        esc.escaping = true;
        for (int k : geometric_indices(1, static_cast<int>(N.basis.cols()), len))
          esc.directions.push_back(
              {k, GridFunction::from_values(op.domain, N.basis.col(k - 1))});
        fams.push_back(std::move(esc));
        break;
      }
      case NonlinearKind::quadratic_two: {
        shrink("shrink-direction", op.basis(5));
        DirectionFamily esc;
        esc.label = "escaping-spectrum";
        esc.escaping = true;
        for (int k : geometric_indices(3, op.dim - 2, len))
          esc.directions.push_back({k, op.basis(k)});
        fams.push_back(std::move(esc));
        break;
      }
      case NonlinearKind::autoconv_real:
      case NonlinearKind::autoconv_complex: {
        shrink("shrink-constant", unit_constant(op.domain));
        const int n_cells = op.domain.n;
        const bool use_bump = spec.direction_family != "oscillatory";
        const bool use_osc =
            spec.direction_family == "oscillatory" || spec.direction_family == "auto";
        if (use_bump) {
          DirectionFamily esc;
          esc.label = "escaping-endpoint-bump";
          esc.escaping = true;
          const int hi = std::min(64, std::max(2, n_cells / 2));
          for (int m : geometric_indices(std::min(4, hi), hi, len))
            esc.directions.push_back({m, endpoint_bump(op.domain, m)});
          fams.push_back(std::move(esc));
        }
        if (use_osc) {
          DirectionFamily esc;
          esc.label = "escaping-oscillation";
          esc.escaping = true;
          const int hi = std::min(64, std::max(1, n_cells / 4));
          for (int m : geometric_indices(std::min(4, hi), hi, len))
            esc.directions.push_back({m, oscillation(op.domain, m)});
          fams.push_back(std::move(esc));
        }
        break;
      }
    }
    return fams;
  }

  const SvdFactors& f = *problem.linear_svd;
  const double hd = std::sqrt(f.domain.h);
  auto right_dir = [&](int k) {  // k is 1-based
    return GridFunction::from_values(f.domain, f.right.col(k - 1) / hd);
  };
  shrink("shrink-leading", right_dir(1));
  DirectionFamily esc;
  esc.label = "escaping-spectrum";
  esc.escaping = true;
  for (int k : geometric_indices(1, static_cast<int>(f.right.cols()), len))
    esc.directions.push_back({k, right_dir(k)});
  fams.push_back(std::move(esc));
  return fams;
}

}  // namespace

ProbeReport probe_local_posedness(const StabilityProblem& problem, const GridFunction& xdag,
                                  const SequenceSpec& spec, const ProbeThresholds& th) {
  const GridFunction y0 = problem.forward(xdag);
  const double r = spec.radius;
  const double image_tiny = 1e-13 * (1.0 + norm(y0));

  ProbeReport report;
  report.kind = "local_posedness";
  report.note =
      "witness-based probe: 'ill_posed' exhibits a sphere sequence whose images "
      "collapse; 'well_posed' only records that no canonical witness was found";

  const bool real_conv =
      problem.nonlinear && problem.nonlinear->kind == NonlinearKind::autoconv_real;

  for (const DirectionFamily& fam : solution_families(problem, spec)) {
    FamilyResult res;
    res.label = fam.label;
    for (size_t j = 0; j < fam.directions.size(); ++j) {
      const auto& [idx, dir] = fam.directions[j];
      const double amp = fam.escaping ? r : r * std::pow(2.0, -idx);
      const GridFunction xn = xdag + amp * promote(dir, xdag.is_complex());
      if (real_conv && (xn.re().array() < 0.0).any()) continue;
      ProbeStep st;
      st.index = idx;
      st.output_gap = point_distance(xn, xdag);
      st.input_gap = point_distance(problem.forward(xn), y0);
      res.steps.push_back(st);
    }
    if (res.steps.size() < 4) {
      res.status = "skipped-insufficient";
      report.families.push_back(std::move(res));
      continue;
    }
    res.considered = true;
    const double in0 = res.steps.front().input_gap;
    const double in1 = res.steps.back().input_gap;
    if (fam.escaping) {
      bool all_tiny = true;
      for (const auto& st : res.steps) all_tiny = all_tiny && st.input_gap <= image_tiny;
      if (all_tiny) {
        res.status = "witness-exact";
      } else if (in0 > 0 && in1 <= th.witness_tol * in0) {
        res.status = "witness";
      } else {
        res.status = "no-witness";
      }
    } else {
      const double out0 = res.steps.front().output_gap;
      const double out1 = res.steps.back().output_gap;
      if (in0 <= image_tiny) {
        res.status = "flat-image";
      } else if (in1 <= 0.1 * in0 && out1 <= 0.1 * out0) {
        res.status = "co-decreasing";
      } else {
        res.status = "inconclusive";
      }
    }
    report.families.push_back(std::move(res));
  }

  const FamilyResult* decisive = nullptr;
  for (const auto& f : report.families) {
    if (f.status == "witness" || f.status == "witness-exact") {
      decisive = &f;
      break;
    }
  }
  if (decisive) {
    report.verdict = "ill_posed";
    report.witness = decisive->label;
  } else {
    bool esc_clean = true, any_codec = false;
    for (const auto& f : report.families) {
      if (f.status == "inconclusive" || f.status == "flat-image") esc_clean = false;
      if (f.status == "co-decreasing") {
        any_codec = true;
        if (!decisive) decisive = &f;
      }
    }
    report.verdict = (esc_clean && any_codec) ? "well_posed" : "inconclusive";
  }
  if (decisive) report.steps = decisive->steps;
  return report;
}

void write_probe_csv(const ProbeReport& report, const std::string& path) {
  std::ostringstream os;
  os << "# kind=" << report.kind << "\n";
  os << "n,input_gap,output_gap\n";
  for (const auto& fam : report.families) {
    os << "# family: " << fam.label << " (" << fam.status << ")\n";
    for (const auto& st : fam.steps)
      os << st.index << ',' << fmt_sci(st.input_gap) << ',' << fmt_sci(st.output_gap) << '\n';
  }
  os << "# witness: " << (report.witness.empty() ? "none" : report.witness) << "\n";
  os << "verdict," << report.verdict << "\n";
  write_file_atomic(path, os.str());
}

}  // namespace illab
