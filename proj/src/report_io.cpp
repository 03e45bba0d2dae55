#include "illab/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "illab/errors.hpp"

namespace illab {

std::string fmt_sci(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.13e", value);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail("io-error", "cannot open " + tmp.string());
    os << content;
    if (!os) fail("io-error", "short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {
double clamp_log(double v) { return std::log10(std::max(v, 1e-300)); }
}  // namespace

void write_svg_loglog(const std::string& path, const std::string& title,
                      const std::vector<SvgSeries>& series,
                      const std::vector<double>& reference_slopes) {
  double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (s.y[i] <= 0 || s.x[i] <= 0) continue;
      lx0 = std::min(lx0, clamp_log(s.x[i]));
      lx1 = std::max(lx1, clamp_log(s.x[i]));
      ly0 = std::min(ly0, clamp_log(s.y[i]));
      ly1 = std::max(ly1, clamp_log(s.y[i]));
    }
  }
  if (lx0 > lx1) { lx0 = 0; lx1 = 1; ly0 = 0; ly1 = 1; }
  if (lx1 - lx0 < 1e-9) lx1 = lx0 + 1;
  if (ly1 - ly0 < 1e-9) ly1 = ly0 + 1;

  const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double lx) { return ml + (lx - lx0) / (lx1 - lx0) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - ly0) / (ly1 - ly0) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">"
     << title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
     << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(lx0)); d <= static_cast<int>(std::floor(lx1)); ++d) {
    os << "<line x1=\"" << px(d) << "\" y1=\"" << mt << "\" x2=\"" << px(d) << "\" y2=\""
       << H - mb << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << px(d) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">1e" << d
       << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d) {
    os << "<line x1=\"" << ml << "\" y1=\"" << py(d) << "\" x2=\"" << W - mr << "\" y2=\""
       << py(d) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(d) + 4
       << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e" << d
       << "</text>\n";
  }

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  int ci = 0;
  for (const auto& s : series) {
    const char* c = colors[ci++ % 5];
    std::ostringstream pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0 || s.y[i] <= 0) continue;
      os << "<circle cx=\"" << px(clamp_log(s.x[i])) << "\" cy=\"" << py(clamp_log(s.y[i]))
         << "\" r=\"3\" fill=\"" << c << "\"/>\n";
      pts << px(clamp_log(s.x[i])) << ',' << py(clamp_log(s.y[i])) << ' ';
    }
    os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << c
       << "\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 + 14 * (ci - 1)
       << "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" << c << "\">" << s.label
       << "</text>\n";
  }

  // Guide lines anchored at the first series' last point.
  if (!series.empty() && !series[0].x.empty()) {
    double ax = clamp_log(series[0].x.back());
    double ay = clamp_log(series[0].y.back());
    for (double slope : reference_slopes) {
      double x1 = lx0, x2 = lx1;
      double y1 = ay + slope * (x1 - ax), y2 = ay + slope * (x2 - ax);
      os << "<line x1=\"" << px(x1) << "\" y1=\"" << py(y1) << "\" x2=\"" << px(x2)
         << "\" y2=\"" << py(y2) << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
      os << "<text x=\"" << px(x2) - 40 << "\" y=\"" << py(y2) - 4
         << "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"#888888\">slope " << slope
         << "</text>\n";
    }
  }
  os << "</svg>\n";
  write_file_atomic(path, os.str());
}

}  // namespace illab
