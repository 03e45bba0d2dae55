#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "illab/config.hpp"
#include "illab/rate_lab.hpp"
#include "illab/report_io.hpp"
#include "illab/stability.hpp"

namespace illab {

namespace {

bool is_linear_op(const std::string& op) {
  return op == "volterra" || op == "diagonal" || op == "identity";
}

std::vector<double> sigma_values(const ExperimentConfig& cfg) {
  std::vector<double> s(cfg.n);
  for (int k = 0; k < cfg.n; ++k) {
    if (cfg.sigma_law == "one_over_k") {
      s[k] = 1.0 / (k + 1);
    } else if (cfg.sigma_law == "constant") {
      s[k] = 1.0;
    } else {  // well_posed_step: spectrum bounded below by 1/2
      s[k] = k < cfg.n / 2 ? 1.0 : 0.5;
    }
  }
  return s;
}

LinearOp build_linear(const ExperimentConfig& cfg) {
  if (cfg.op == "volterra") return make_volterra(make_uniform_grid(cfg.n, 0.0, 1.0));
  if (cfg.op == "identity") return make_identity(make_uniform_grid(cfg.n, 0.0, 1.0));
  const std::vector<double> s = sigma_values(cfg);
  return make_diagonal(Eigen::Map<const Eigen::VectorXd>(s.data(), cfg.n));
}

NonlinearOp build_nonlinear(const ExperimentConfig& cfg) {
  if (cfg.op == "scalar_rational") return NonlinearOp::scalar_rational();
  if (cfg.op == "weighted_identity")
    return NonlinearOp::weighted_identity(make_uniform_grid(cfg.n, 0.0, 1.0));
  if (cfg.op == "quadratic_two") return NonlinearOp::quadratic_two(sigma_values(cfg), cfg.n);
  if (cfg.op == "autoconv_real")
    return NonlinearOp::autoconv_real(make_uniform_grid(cfg.n, 0.0, 1.0));
  return NonlinearOp::autoconv_complex(make_uniform_grid(cfg.n, 0.0, 1.0));
}

// The probe anchor: data for the image-space probe, solution for the
// solution-space probe and for the autoconvolution kinds.
GridFunction build_target(const ExperimentConfig& cfg, const NonlinearOp& op,
                          bool as_solution) {
  const std::string& t = cfg.target;
  switch (op.kind) {
    case NonlinearKind::scalar_rational: {
      double v = 0.0;
      if (t == "one") v = 1.0;
      else if (t == "value") v = cfg.target_value;
      return GridFunction::constant(op.domain, v);
    }
    case NonlinearKind::weighted_identity: {
      if (t == "one") return GridFunction::constant(op.domain, 1.0);
      if (t == "value") return GridFunction::constant(op.domain, cfg.target_value);
      return GridFunction::zero(op.domain);
    }
    case NonlinearKind::quadratic_two: {
      if (t == "u2") return op.basis(2);
      if (t == "value") return cfg.target_value * op.basis(1);
      return op.basis(1);  // default and "u1"
    }
    default: {  // autoconvolution: the anchor is always a solution element
      double v = 1.0;
      if (t == "value") v = cfg.target_value;
      (void)as_solution;
      return GridFunction::constant(op.domain, v);
    }
  }
}

GridFunction build_linear_target(const ExperimentConfig& cfg, const LinearOp& A,
                                 bool as_solution) {
  GridFunction x = GridFunction::constant(A.domain, 1.0);
  if (cfg.target == "zero") x = GridFunction::zero(A.domain);
  if (cfg.target == "value") x = GridFunction::constant(A.domain, cfg.target_value);
  return as_solution ? x : apply(A, x);
}

SequenceSpec sequence_spec(const ExperimentConfig& cfg) {
  SequenceSpec spec;
  spec.length = cfg.length;
  spec.radius = cfg.radius;
  spec.seed = cfg.seed;
  spec.direction_family = cfg.direction_family;
  return spec;
}

RateSettings rate_settings(const ExperimentConfig& cfg) {
  RateSettings s;
  s.delta_min = cfg.delta_min;
  s.delta_max = cfg.delta_max;
  s.delta_count = cfg.delta_count;
  s.alpha_grid = {cfg.alpha_min, cfg.alpha_max, cfg.alpha_count};
  s.seed = cfg.seed;
  return s;
}

SourceKind parse_source(const std::string& s) {
  if (s == "smooth") return SourceKind::smooth;
  if (s == "supersmooth") return SourceKind::supersmooth;
  if (s == "range_op") return SourceKind::range_op;
  if (s == "range_op_squared") return SourceKind::range_op_squared;
  return SourceKind::zero;
}

Method parse_method(const std::string& m) {
  return m == "tikhonov" ? Method::tikhonov : Method::lavrentiev;
}

std::string join(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

StabilityProblem build_problem(const ExperimentConfig& cfg) {
  if (is_linear_op(cfg.op)) return make_problem(build_linear(cfg));
  const NonlinearOp op = build_nonlinear(cfg);
  if (op.kind == NonlinearKind::autoconv_real || op.kind == NonlinearKind::autoconv_complex)
    return make_problem(op, build_target(cfg, op, true));
  return make_problem(op);
}

void run_classify(const ExperimentConfig& cfg) {
  if (!is_linear_op(cfg.op))
    fail("invalid-config", "classification needs a linear operator");
  const LinearOp A = build_linear(cfg);
  const SvdFactors f = svd(A);
  const NashedReport rep = nashed_classify(f);

  nlohmann::json j;
  j["op"] = cfg.op;
  j["classification"] = rep.classification;
  j["numerical_rank"] = rep.numerical_rank;
  j["decay_exponent"] = rep.decay_exponent;
  j["cutoff_used"] = rep.cutoff_used;
  j["note"] = rep.note;
  write_file_atomic(join(cfg.out_dir, "classification.json"), j.dump(2) + "\n");

  std::ostringstream os;
  os << "k,sigma\n";
  for (int i = 0; i < f.singular_values.size(); ++i)
    os << (i + 1) << ',' << fmt_sci(f.singular_values[i]) << '\n';
  write_file_atomic(join(cfg.out_dir, "singular_values.csv"), os.str());

  if (cfg.svg) {
    SvgSeries pts;
    pts.label = "sigma_k";
    for (int i = 0; i < f.singular_values.size(); ++i) {
      if (f.singular_values[i] <= 0) continue;
      pts.x.push_back(i + 1);
      pts.y.push_back(f.singular_values[i]);
    }
    write_svg_loglog(join(cfg.out_dir, "singular_values.svg"), "singular value decay",
                     {pts}, {-1.0});
  }
}

void run_qdist(const ExperimentConfig& cfg) {
  const StabilityProblem problem = build_problem(cfg);
  GridFunction y = is_linear_op(cfg.op)
                       ? build_linear_target(cfg, *problem.linear, false)
                       : (problem.known_solution
                              ? problem.forward(*problem.known_solution)
                              : build_target(cfg, *problem.nonlinear, false));

  // Perturbed data: a shift of size radius along a canonical range direction.
  GridFunction yp = y;
  if (is_linear_op(cfg.op)) {
    const SvdFactors& f = *problem.linear_svd;
    yp = y + (cfg.radius / std::sqrt(f.range.h)) *
                 GridFunction::from_values(f.range, Eigen::VectorXd(f.left.col(0)));
  } else if (problem.nonlinear->kind == NonlinearKind::quadratic_two) {
    yp = y + cfg.radius * problem.nonlinear->basis(2);
  } else if (problem.known_solution) {
    const GridFunction xp =
        *problem.known_solution +
        cfg.radius * GridFunction::constant(problem.nonlinear->domain,
                                            1.0 / std::sqrt(1.0));
    yp = eval(*problem.nonlinear, xp);
  } else {
    yp = y + cfg.radius * GridFunction::constant(y.grid(), 1.0);
  }

  PreimageSet base = problem.solve_preimage(y);
  StabilityProblem shifted = problem;
  if (problem.known_solution) {
    shifted.known_solution =
        *problem.known_solution +
        cfg.radius * GridFunction::constant(problem.nonlinear->domain, 1.0);
  }
  PreimageSet other = shifted.solve_preimage(yp);
  if (base.empty() || other.empty() || !base.in_range || !other.in_range)
    fail("empty-target", "a preimage set for the quasi-distance pair is empty");

  nlohmann::json j;
  j["forward"] = qdist(other, base);
  j["reverse"] = qdist(base, other);
  j["base_points"] = base.points.size();
  j["other_points"] = other.points.size();
  j["base_has_subspace"] = base.subspace.has_value();
  write_file_atomic(join(cfg.out_dir, "qdist.json"), j.dump(2) + "\n");
  write_preimage_csv(base, join(cfg.out_dir, "preimage_base.csv"));
  write_preimage_csv(other, join(cfg.out_dir, "preimage_shifted.csv"));
}

void run_probe(const ExperimentConfig& cfg, bool image_space) {
  const StabilityProblem problem = build_problem(cfg);
  ProbeReport report;
  if (image_space) {
    const GridFunction y = is_linear_op(cfg.op)
                               ? build_linear_target(cfg, *problem.linear, false)
                               : (problem.known_solution
                                      ? problem.forward(*problem.known_solution)
                                      : build_target(cfg, *problem.nonlinear, false));
    report = probe_stable_solvability(problem, y, sequence_spec(cfg));
  } else {
    const GridFunction x = is_linear_op(cfg.op)
                               ? build_linear_target(cfg, *problem.linear, true)
                               : build_target(cfg, *problem.nonlinear, true);
    report = probe_local_posedness(problem, x, sequence_spec(cfg));
  }
  write_probe_csv(report, join(cfg.out_dir, "probe.csv"));

  nlohmann::json j;
  j["kind"] = report.kind;
  j["verdict"] = report.verdict;
  j["witness"] = report.witness;
  j["note"] = report.note;
  write_file_atomic(join(cfg.out_dir, "verdict.json"), j.dump(2) + "\n");

  if (cfg.svg) {
    std::vector<SvgSeries> series;
    for (const auto& fam : report.families) {
      SvgSeries s;
      s.label = fam.label;
      for (const auto& st : fam.steps) {
        if (st.input_gap <= 0 || st.output_gap <= 0) continue;
        s.x.push_back(st.input_gap);
        s.y.push_back(st.output_gap);
      }
      if (!s.x.empty()) series.push_back(std::move(s));
    }
    if (!series.empty())
      write_svg_loglog(join(cfg.out_dir, "probe.svg"), "output gap against input gap",
                       series, {1.0});
  }
}

void run_rates(const ExperimentConfig& cfg) {
  if (!is_linear_op(cfg.op))
    fail("invalid-config", "rate experiments need a linear operator");
  const LinearOp A = build_linear(cfg);
  const SvdFactors f = svd(A);
  SourceSpec spec;
  spec.kind = parse_source(cfg.source);
  spec.seed = cfg.seed;
  const GridFunction xdag = make_source(A, f, spec);
  const RateSeries series =
      run_rate_experiment(A, parse_method(cfg.method), xdag, rate_settings(cfg));
  write_rate_csv(series, join(cfg.out_dir, "rates.csv"));
  if (cfg.svg) write_rate_svg(series, join(cfg.out_dir, "rates.svg"));
}

void run_saturation(const ExperimentConfig& cfg) {
  if (!is_linear_op(cfg.op))
    fail("invalid-config", "saturation experiments need a linear operator");
  const LinearOp A = build_linear(cfg);
  const std::vector<SaturationVerdict> verdicts =
      saturation_experiment(A, parse_method(cfg.method), rate_settings(cfg));
  write_saturation_report(verdicts, join(cfg.out_dir, "saturation.csv"));
  for (const auto& v : verdicts) {
    write_rate_csv(v.series,
                   join(cfg.out_dir, "rates_" + to_string(v.source) + ".csv"));
    if (cfg.svg && !v.series.underflow_all)
      write_rate_svg(v.series, join(cfg.out_dir, "rates_" + to_string(v.source) + ".svg"));
  }
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
  try {
    write_file_atomic(join(cfg.out_dir, "config.json"), serialize_config(cfg));
    if (cfg.experiment == "classify") run_classify(cfg);
    else if (cfg.experiment == "qdist") run_qdist(cfg);
    else if (cfg.experiment == "probe_stability") run_probe(cfg, true);
    else if (cfg.experiment == "probe_local") run_probe(cfg, false);
    else if (cfg.experiment == "rates") run_rates(cfg);
    else run_saturation(cfg);
  } catch (const Error& e) {
    nlohmann::json j;
    j["code"] = e.code();
    j["message"] = e.what();
    write_file_atomic(join(cfg.out_dir, "error.json"), j.dump(2) + "\n");
    throw;
  } catch (const std::exception& e) {
    nlohmann::json j;
    j["code"] = "internal-error";
    j["message"] = e.what();
    write_file_atomic(join(cfg.out_dir, "error.json"), j.dump(2) + "\n");
    throw;
  }
}

}  // namespace illab
