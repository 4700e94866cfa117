#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "molgen/bench/svg.hpp"
#include "molgen/error.hpp"
#include "molgen/io.hpp"

namespace molgen::bench {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range axis_range(const std::vector<Series>& series, bool take_x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Series& s : series) {
    const std::vector<double>& v = take_x ? s.x : s.y;
    for (double d : v) {
      if (!std::isfinite(d)) throw Error("svg plot requires finite coordinates");
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (lo > hi) return {0.0, 1.0};
  if (hi - lo < 1e-12) {
    double pad = std::max(1.0, std::abs(lo));
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Tick label values: 5 evenly spaced positions over the range.
std::vector<double> ticks(const Range& r) {
  std::vector<double> t(5);
  for (std::size_t i = 0; i < 5; ++i)
    t[i] = r.lo + (r.hi - r.lo) * static_cast<double>(i) / 4.0;
  return t;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series, int width, int height) {
  for (const Series& s : series)
    if (s.x.size() != s.y.size())
      throw Error("svg series '" + s.label + "' has mismatched x/y lengths");

  const double margin_l = 64, margin_r = 16, margin_t = 32, margin_b = 48;
  const double plot_w = width - margin_l - margin_r;
  const double plot_h = height - margin_t - margin_b;
  Range rx = axis_range(series, true);
  Range ry = axis_range(series, false);
  auto px = [&](double x) {
    return margin_l + plot_w * (x - rx.lo) / (rx.hi - rx.lo);
  };
  auto py = [&](double y) {
    return margin_t + plot_h * (1.0 - (y - ry.lo) / (ry.hi - ry.lo));
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << escape(title)
      << "</text>\n";

  // Plot frame and grid lines at the tick positions.
  svg << "<rect x=\"" << fmt_double(margin_l) << "\" y=\"" << fmt_double(margin_t)
      << "\" width=\"" << fmt_double(plot_w) << "\" height=\"" << fmt_double(plot_h)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (double t : ticks(rx)) {
    double x = px(t);
    svg << "<line x1=\"" << fmt_double(x) << "\" y1=\"" << fmt_double(margin_t)
        << "\" x2=\"" << fmt_double(x) << "\" y2=\""
        << fmt_double(margin_t + plot_h) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fmt_double(x) << "\" y=\""
        << fmt_double(margin_t + plot_h + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt_double(t) << "</text>\n";
  }
  for (double t : ticks(ry)) {
    double y = py(t);
    svg << "<line x1=\"" << fmt_double(margin_l) << "\" y1=\"" << fmt_double(y)
        << "\" x2=\"" << fmt_double(margin_l + plot_w) << "\" y2=\""
        << fmt_double(y) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fmt_double(margin_l - 6) << "\" y=\""
        << fmt_double(y + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt_double(t) << "</text>\n";
  }
  svg << "<text x=\"" << fmt_double(margin_l + plot_w / 2) << "\" y=\""
      << fmt_double(height - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(x_label) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << fmt_double(margin_t + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 14 " << fmt_double(margin_t + plot_h / 2)
      << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    if (s.line && s.x.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) svg << " ";
        svg << fmt_double(px(s.x[i])) << "," << fmt_double(py(s.y[i]));
      }
      svg << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << "<circle cx=\"" << fmt_double(px(s.x[i])) << "\" cy=\""
            << fmt_double(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
            << "\"/>\n";
    }
    svg << "<text x=\"" << fmt_double(margin_l + plot_w - 8) << "\" y=\""
        << fmt_double(margin_t + 16 + 14 * static_cast<double>(si))
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
        << "fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  write_file(path, svg.str());
}

}  // namespace molgen::bench
