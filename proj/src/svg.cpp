#include "mlr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mlr::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double t(double v) const {  // to [0,1]
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return b > a ? (x - a) / (b - a) : 0.5;
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      const int e0 = static_cast<int>(std::floor(std::log10(lo)));
      const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
      const int step = std::max(1, (e1 - e0) / 6);
      for (int e = e0; e <= e1; e += step) out.push_back(std::pow(10.0, e));
    } else {
      const double span = hi - lo;
      if (span <= 0) return {lo};
      const double raw = span / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
          step = mag * m;
          break;
        }
      for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step)
        out.push_back(v);
    }
    return out;
  }
};

}  // namespace

void write_plot(std::ostream& os, const std::vector<Series>& series, const PlotOptions& opt) {
  const int ml = 70, mr = 20, mt = 34, mb = 48;
  const double pw = opt.width - ml - mr;
  const double ph = opt.height - mt - mb;

  Axis ax{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(), opt.logx};
  Axis ay{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(), opt.logy};
  bool any = false;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((opt.logx && s.x[i] <= 0) || (opt.logy && s.y[i] <= 0)) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      ax.lo = std::min(ax.lo, s.x[i]);
      ax.hi = std::max(ax.hi, s.x[i]);
      ay.lo = std::min(ay.lo, s.y[i]);
      ay.hi = std::max(ay.hi, s.y[i]);
      any = true;
    }
  }
  if (!any) {
    ax = {0, 1, opt.logx};
    ay = {0, 1, opt.logy};
  }
  if (ax.lo == ax.hi) {
    ax.lo -= 0.5;
    ax.hi += 0.5;
  }
  if (ay.lo == ay.hi) {
    ay.lo = opt.logy ? ay.lo / 2 : ay.lo - 0.5;
    ay.hi = opt.logy ? ay.hi * 2 : ay.hi + 0.5;
  }

  auto px = [&](double v) { return ml + pw * ax.t(v); };
  auto py = [&](double v) { return mt + ph * (1.0 - ay.t(v)); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
     << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << opt.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << opt.title << "</text>\n";

  // axes with ticks
  os << "<g stroke=\"black\" fill=\"none\"><path d=\"M" << fmt(ml) << " " << fmt(mt) << " L"
     << fmt(ml) << " " << fmt(mt + ph) << " L" << fmt(ml + pw) << " " << fmt(mt + ph)
     << "\"/></g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"black\">\n";
  for (double v : ax.ticks()) {
    if (v < ax.lo - 1e-12 || v > ax.hi * (1 + 1e-12)) continue;
    const double x = px(v);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(x)
       << "\" y2=\"" << fmt(mt + ph + 4) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(mt + ph + 16)
       << "\" text-anchor=\"middle\">" << fmt_tick(v) << "</text>\n";
  }
  for (double v : ay.ticks()) {
    if (v < ay.lo - 1e-12 || v > ay.hi * (1 + 1e-12)) continue;
    const double y = py(v);
    os << "<line x1=\"" << fmt(ml - 4) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(ml)
       << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(y + 3)
       << "\" text-anchor=\"end\">" << fmt_tick(v) << "</text>\n";
  }
  os << "<text x=\"" << opt.width / 2 << "\" y=\"" << opt.height - 8
     << "\" text-anchor=\"middle\" font-size=\"12\">" << opt.xlabel << "</text>\n";
  os << "<text x=\"14\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " << mt + ph / 2
     << ")\">" << opt.ylabel << "</text>\n";
  os << "</g>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % 8];
    if (!s.points_only) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if ((opt.logx && s.x[i] <= 0) || (opt.logy && s.y[i] <= 0)) continue;
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
      }
      os << "\"/>\n";
    } else {
      for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if ((opt.logx && s.x[i] <= 0) || (opt.logy && s.y[i] <= 0)) continue;
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
           << "\" r=\"2\" fill=\"" << color << "\"/>\n";
      }
    }
    os << "<text x=\"" << opt.width - mr - 6 << "\" y=\"" << mt + 14 + 14 * si
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
       << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
}

void write_plot(const std::string& path, const std::vector<Series>& series,
                const PlotOptions& opt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_plot(os, series, opt);
}

}  // namespace mlr::svg
