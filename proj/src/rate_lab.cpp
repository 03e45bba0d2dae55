#include "illab/rate_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "illab/report_io.hpp"

namespace illab {

double underflow_floor(double xdag_norm) { return std::max(1e-12 * xdag_norm, 1e-14); }

LineFit fit_rate_exponent(const std::vector<double>& deltas, const std::vector<double>& errors,
                          double floor_value) {
  std::vector<double> ds, es;
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (errors[i] <= floor_value) continue;
    ds.push_back(deltas[i]);
    es.push_back(errors[i]);
  }
  if (ds.size() < 3) fail("insufficient-points", "too few points above the error floor");
  return loglog_fit(ds, es);
}

namespace {

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0) || !(hi > lo)) fail("invalid-delta-grid", "need 0 < min < max");
  std::vector<double> out;
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(l0 + (l1 - l0) * i / (count - 1)));
  return out;
}

}  // namespace

RateSeries run_rate_experiment(const LinearOp& A, Method method, const GridFunction& xdag,
                               const RateSettings& s) {
  const GridFunction y_exact = apply(A, xdag);
  const ShiftCache cache(A, method);
  const SvdFactors f = svd(A);
  DirectionSet dirs =
      make_direction_set(f, s.leading, s.trailing, s.random_count, s.seed);
  if (!s.worst_case) {
    DirectionSet single;
    for (size_t i = 0; i < dirs.labels.size(); ++i) {
      if (dirs.labels[i] == "rand:1") {
        single.directions.push_back(dirs.directions[i]);
        single.labels.push_back(dirs.labels[i]);
      }
    }
    dirs = std::move(single);
  }

  RateSeries series;
  for (double delta : log_spaced(s.delta_min, s.delta_max, s.delta_count)) {
    const WorstCaseResult wc =
        worst_case_error(cache, y_exact, xdag, dirs, delta, s.alpha_grid);
    series.deltas.push_back(delta);
    series.errors.push_back(wc.error);
    series.alphas.push_back(wc.alpha);
    series.direction_labels.push_back(wc.direction_label);
  }

  const double floor_value = underflow_floor(norm(xdag));
  size_t above = 0;
  for (double e : series.errors)
    if (e > floor_value) ++above;
  if (above < 3) {
    series.underflow_all = true;
    return series;
  }
  const LineFit fit = fit_rate_exponent(series.deltas, series.errors, floor_value);
  series.kappa = fit.slope;
  series.intercept = fit.intercept;
  series.r2 = fit.r2;
  return series;
}

std::vector<SaturationVerdict> saturation_experiment(const LinearOp& A, Method method,
                                                     const RateSettings& settings,
                                                     double cap_tol) {
  const double cap = method == Method::tikhonov ? 2.0 / 3.0 : 0.5;
  const SvdFactors f = svd(A);
  std::vector<SourceKind> kinds =
      method == Method::tikhonov
          ? std::vector<SourceKind>{SourceKind::smooth, SourceKind::supersmooth,
                                    SourceKind::zero}
          : std::vector<SourceKind>{SourceKind::range_op, SourceKind::range_op_squared,
                                    SourceKind::zero};

  std::vector<SaturationVerdict> out;
  for (SourceKind kind : kinds) {
    SourceSpec spec;
    spec.kind = kind;
    spec.seed = settings.seed;
    const GridFunction xdag = make_source(A, f, spec);

    SaturationVerdict v;
    v.source = kind;
    v.cap = cap;
    v.series = run_rate_experiment(A, method, xdag, settings);
    if (v.series.underflow_all) {
      v.verdict = "degenerate_zero";
    } else if (v.series.kappa > cap + cap_tol) {
      v.verdict = "rate_improves";
    } else {
      v.verdict = "rate_capped";
    }
    out.push_back(std::move(v));
  }
  return out;
}

void write_rate_csv(const RateSeries& series, const std::string& path) {
  std::ostringstream os;
  os << "delta,error,alpha,direction\n";
  for (size_t i = 0; i < series.deltas.size(); ++i) {
    os << fmt_sci(series.deltas[i]) << ',' << fmt_sci(series.errors[i]) << ','
       << fmt_sci(series.alphas[i]) << ',' << series.direction_labels[i] << '\n';
  }
  os << "# kappa=" << fmt_sci(series.kappa) << " r2=" << fmt_sci(series.r2)
     << " underflow_all=" << (series.underflow_all ? 1 : 0) << "\n";
  write_file_atomic(path, os.str());
}

void write_rate_svg(const RateSeries& series, const std::string& path) {
  SvgSeries pts;
  pts.label = "best possible error";
  for (size_t i = 0; i < series.deltas.size(); ++i) {
    if (series.errors[i] <= 0) continue;
    pts.x.push_back(series.deltas[i]);
    pts.y.push_back(series.errors[i]);
  }
  write_svg_loglog(path, "error against noise level", {pts}, {0.5, 2.0 / 3.0, 1.0});
}

void write_saturation_report(const std::vector<SaturationVerdict>& verdicts,
                             const std::string& path) {
  std::ostringstream os;
  os << "source,kappa,r2,cap,verdict\n";
  for (const auto& v : verdicts) {
    os << to_string(v.source) << ',' << fmt_sci(v.series.kappa) << ','
       << fmt_sci(v.series.r2) << ',' << fmt_sci(v.cap) << ',' << v.verdict << '\n';
  }
  write_file_atomic(path, os.str());
}

}  // namespace illab
