#ifndef TIKDYN_SVG_PLOT_HPP
#define TIKDYN_SVG_PLOT_HPP

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "tikdyn/common.hpp"

namespace tikdyn {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color;
};

namespace svg_detail {

inline std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string decade_label(int k) { return "1e" + std::to_string(k); }

}  // namespace svg_detail

/// Minimal log-log line plot: decade gridlines, legend, polylines split at
/// nonpositive values. Output is deterministic UTF-8 with LF endings.
inline void write_loglog_svg(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<PlotSeries>& series, double y_floor = 1e-300) {
  const double width = 720, height = 540;
  const double ml = 78, mr = 24, mt = 46, mb = 64;

  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0) || !(y > y_floor) || !std::isfinite(x) || !std::isfinite(y)) continue;
      const double lx = std::log10(x), ly = std::log10(y);
      if (!any) {
        x_lo = x_hi = lx;
        y_lo = y_hi = ly;
        any = true;
      }
      x_lo = std::min(x_lo, lx);
      x_hi = std::max(x_hi, lx);
      y_lo = std::min(y_lo, ly);
      y_hi = std::max(y_hi, ly);
    }
  if (!any) {
    x_lo = 0;
    x_hi = 1;
    y_lo = 0;
    y_hi = 1;
  }
  x_lo = std::floor(x_lo);
  x_hi = std::ceil(x_hi + 1e-9);
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi + 1e-9);
  if (x_hi - x_lo < 1) x_hi = x_lo + 1;
  if (y_hi - y_lo < 1) y_hi = y_lo + 1;

  auto px = [&](double lx) { return ml + (lx - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
  auto py = [&](double ly) {
    return height - mb - (ly - y_lo) / (y_hi - y_lo) * (height - mt - mb);
  };

  std::ofstream out(path, std::ios::binary);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
      << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";

  const int x_step = std::max(1, static_cast<int>((x_hi - x_lo) / 10));
  const int y_step = std::max(1, static_cast<int>((y_hi - y_lo) / 10));
  for (int k = static_cast<int>(x_lo); k <= static_cast<int>(x_hi); k += x_step) {
    const double X = px(k);
    out << "<line x1=\"" << svg_detail::f2(X) << "\" y1=\"" << svg_detail::f2(mt) << "\" x2=\""
        << svg_detail::f2(X) << "\" y2=\"" << svg_detail::f2(height - mb)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << svg_detail::f2(X) << "\" y=\"" << svg_detail::f2(height - mb + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << svg_detail::decade_label(k)
        << "</text>\n";
  }
  for (int k = static_cast<int>(y_lo); k <= static_cast<int>(y_hi); k += y_step) {
    const double Y = py(k);
    out << "<line x1=\"" << svg_detail::f2(ml) << "\" y1=\"" << svg_detail::f2(Y) << "\" x2=\""
        << svg_detail::f2(width - mr) << "\" y2=\"" << svg_detail::f2(Y)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << svg_detail::f2(ml - 6) << "\" y=\"" << svg_detail::f2(Y + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << svg_detail::decade_label(k)
        << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
      << "\" height=\"" << height - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"20\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 " << height / 2
      << ")\">" << y_label << "</text>\n";

  double legend_y = mt + 16;
  for (const auto& s : series) {
    std::string seg;
    int seg_pts = 0;
    auto flush = [&]() {
      if (seg_pts >= 2)
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\" points=\"" << seg << "\"/>\n";
      seg.clear();
      seg_pts = 0;
    };
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0) || !(y > y_floor) || !std::isfinite(y)) {
        flush();
        continue;
      }
      seg += svg_detail::f2(px(std::log10(x))) + "," + svg_detail::f2(py(std::log10(y))) + " ";
      ++seg_pts;
    }
    flush();
    out << "<line x1=\"" << width - mr - 150 << "\" y1=\"" << legend_y << "\" x2=\""
        << width - mr - 126 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - mr - 120 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"12\">" << s.label << "</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
}

}  // namespace tikdyn

#endif
