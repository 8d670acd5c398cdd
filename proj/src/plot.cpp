#include "rggrecon/plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rggrecon/io.hpp"

namespace rgg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

struct Panel {
  double x0, y0, w, h;        // pixel box
  double lo_x, hi_x, lo_y, hi_y;  // data range (already in log space for the log panel)

  double px(double x) const { return x0 + (x - lo_x) / (hi_x - lo_x) * w; }
  double py(double y) const { return y0 + h - (y - lo_y) / (hi_y - lo_y) * h; }
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

void pad_range(double& lo, double& hi) {
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double d = 0.08 * (hi - lo);
  lo -= d;
  hi += d;
}

void frame(std::ostringstream& o, const Panel& p, const std::string& title, const std::string& xlabel,
           const std::string& ylabel) {
  o << "<rect x='" << p.x0 << "' y='" << p.y0 << "' width='" << p.w << "' height='" << p.h
    << "' fill='none' stroke='#333'/>\n";
  o << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 - 12 << "' text-anchor='middle' font-size='15'>" << title
    << "</text>\n";
  o << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 + p.h + 38 << "' text-anchor='middle'>" << xlabel
    << "</text>\n";
  o << "<text transform='translate(" << p.x0 - 48 << ',' << p.y0 + p.h / 2
    << ") rotate(-90)' text-anchor='middle'>" << ylabel << "</text>\n";
}

void ticks(std::ostringstream& o, const Panel& p, bool log_x, bool log_y) {
  for (int i = 0; i <= 4; ++i) {
    const double x = p.lo_x + (p.hi_x - p.lo_x) * i / 4.0;
    const double y = p.lo_y + (p.hi_y - p.lo_y) * i / 4.0;
    o << "<line x1='" << p.px(x) << "' y1='" << p.y0 + p.h << "' x2='" << p.px(x) << "' y2='" << p.y0 + p.h + 5
      << "' stroke='#333'/>\n";
    o << "<text x='" << p.px(x) << "' y='" << p.y0 + p.h + 19 << "' text-anchor='middle' font-size='11'>"
      << fmt(log_x ? std::exp(x) : x, 3) << "</text>\n";
    o << "<line x1='" << p.x0 - 5 << "' y1='" << p.py(y) << "' x2='" << p.x0 << "' y2='" << p.py(y)
      << "' stroke='#333'/>\n";
    o << "<text x='" << p.x0 - 8 << "' y='" << p.py(y) + 4 << "' text-anchor='end' font-size='11'>"
      << fmt(log_y ? std::exp(y) : y, 3) << "</text>\n";
  }
}

/// Predicted exponent, extended to the closed interval [0, 1/m] for drawing.
double predicted(double alpha, int m) { return std::max(0.0, 1.0 / m - 2.0 * m / (m + 1.0) * alpha); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

Plot render_plot(const std::vector<SweepRow>& rows) {
  std::map<std::pair<int, double>, std::map<double, std::vector<double>>> groups;
  for (const auto& r : rows)
    if (r.ok() && r.d_star > 0 && std::isfinite(r.d_star))
      groups[{r.m, r.alpha}][static_cast<double>(r.n)].push_back(r.d_star);
  if (groups.empty()) throw Error(ErrorKind::Format, "sweep CSV has no successful rows to plot");

  Plot plot;
  for (const auto& [key, by_n] : groups) {
    PlotSeries s;
    s.m = key.first;
    s.alpha = key.second;
    for (const auto& [n, ds] : by_n) {
      s.ns.push_back(n);
      s.medians.push_back(median(ds));
    }
    if (s.ns.size() >= 2) {
      s.fit = fit_loglog(s.ns, s.medians);
      s.fitted = true;
    }
    plot.series.push_back(std::move(s));
  }

  // Left panel ranges.
  double a_lo = 0.0, a_hi = 0.5;
  const int m = plot.series.front().m;
  a_hi = 1.0 / m;
  double b_lo = 0.0, b_hi = predicted(0.0, m);
  for (const auto& s : plot.series)
    if (s.fitted) {
      b_lo = std::min(b_lo, s.fit.slope);
      b_hi = std::max(b_hi, s.fit.slope);
    }
  pad_range(b_lo, b_hi);
  const Panel left{80, 50, 400, 320, a_lo, a_hi, b_lo, b_hi};

  // Right panel ranges in log space.
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.ns.size(); ++i) {
      x_lo = std::min(x_lo, std::log(s.ns[i]));
      x_hi = std::max(x_hi, std::log(s.ns[i]));
      y_lo = std::min(y_lo, std::log(s.medians[i]));
      y_hi = std::max(y_hi, std::log(s.medians[i]));
    }
  pad_range(x_lo, x_hi);
  pad_range(y_lo, y_hi);
  const Panel right{600, 50, 400, 320, x_lo, x_hi, y_lo, y_hi};

  std::ostringstream o;
  o << "<?xml version='1.0' encoding='UTF-8'?>\n"
    << "<svg xmlns='http://www.w3.org/2000/svg' width='1100' height='470' viewBox='0 0 1100 470' "
       "font-family='sans-serif' font-size='13'>\n"
    << "<rect width='1100' height='470' fill='white'/>\n";

  frame(o, left, "fitted exponent vs alpha", "alpha", "beta");
  ticks(o, left, false, false);
  {
    // Predicted exponent, piecewise linear with a kink where it reaches zero.
    const double kink = std::clamp(1.0 / m / (2.0 * m / (m + 1.0)), a_lo, a_hi);
    o << "<polyline fill='none' stroke='#000' stroke-width='2' points='" << left.px(a_lo) << ','
      << left.py(predicted(a_lo, m)) << ' ' << left.px(kink) << ',' << left.py(predicted(kink, m)) << ' '
      << left.px(a_hi) << ',' << left.py(predicted(a_hi, m)) << "'/>\n";
    o << "<text x='" << left.x0 + left.w - 8 << "' y='" << left.y0 + 18
      << "' text-anchor='end' font-size='12'>line: predicted exponent</text>\n";
  }
  std::size_t color = 0;
  for (const auto& s : plot.series) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    if (!s.fitted) continue;
    o << "<circle cx='" << left.px(s.alpha) << "' cy='" << left.py(s.fit.slope) << "' r='5' fill='" << c
      << "'><title>alpha=" << fmt(s.alpha) << " slope=" << fmt(s.fit.slope, 6) << "</title></circle>\n";
  }

  frame(o, right, "median d* vs n (log-log)", "n", "median d*");
  ticks(o, right, true, true);
  color = 0;
  double legend_y = right.y0 + 18;
  for (const auto& s : plot.series) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    for (std::size_t i = 0; i < s.ns.size(); ++i)
      o << "<circle cx='" << right.px(std::log(s.ns[i])) << "' cy='" << right.py(std::log(s.medians[i]))
        << "' r='4' fill='" << c << "'/>\n";
    std::string label = "alpha=" + fmt(s.alpha);
    if (s.fitted) {
      const double lx0 = std::log(s.ns.front()), lx1 = std::log(s.ns.back());
      o << "<line x1='" << right.px(lx0) << "' y1='" << right.py(s.fit.intercept + s.fit.slope * lx0) << "' x2='"
        << right.px(lx1) << "' y2='" << right.py(s.fit.intercept + s.fit.slope * lx1) << "' stroke='" << c
        << "' stroke-width='1.5'/>\n";
      label += " slope=" + fmt(s.fit.slope, 6);
    }
    o << "<text x='" << right.x0 + 8 << "' y='" << legend_y << "' fill='" << c << "' font-size='12'>" << label
      << "</text>\n";
    legend_y += 16;
  }
  o << "</svg>\n";
  plot.svg = o.str();
  return plot;
}

Plot plot_csv(const std::filesystem::path& csv, const std::filesystem::path& svg) {
  Plot p = render_plot(read_sweep_csv(csv));
  write_text(svg, p.svg);
  return p;
}

}  // namespace rgg
