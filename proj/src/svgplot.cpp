#include "ergokit/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ergokit/csvio.hpp"
#include "ergokit/errors.hpp"

namespace ergokit {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void absorb(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
};

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 48;

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec) {
  if (spec.series.empty()) throw SchemaError("write_svg_plot: no series to draw");

  Range xr, yr;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw SchemaError("write_svg_plot: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = spec.log_y ? (s.y[i] > 0 ? std::log10(s.y[i]) : NAN) : s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      xr.absorb(s.x[i]);
      yr.absorb(y);
    }
  }
  for (const auto& [v, color] : spec.h_lines) {
    const double y = spec.log_y ? (v > 0 ? std::log10(v) : NAN) : v;
    if (std::isfinite(y)) yr.absorb(y);
  }
  for (const auto& [v, color] : spec.v_lines) {
    if (std::isfinite(v)) xr.absorb(v);
  }
  if (!xr.valid() || !yr.valid()) throw SchemaError("write_svg_plot: no finite data");
  if (xr.hi == xr.lo) xr.hi = xr.lo + 1.0;
  if (yr.hi == yr.lo) yr.hi = yr.lo + 1.0;

  const double plot_w = spec.width - kMarginLeft - kMarginRight;
  const double plot_h = spec.height - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double yv) {
    const double y = spec.log_y ? std::log10(yv) : yv;
    return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h;
  };

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw SchemaError("write_svg_plot: cannot write " + path.string());

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << spec.title << "</text>\n";

  // Axes with 5 ticks per side.
  out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h << "\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kMarginTop + plot_h << "\"/>\n";
  out << "</g>\n<g font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    out << "<text x=\"" << format_double(px(fx)) << "\" y=\"" << kMarginTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << format_double(fx) << "</text>\n";
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double label = spec.log_y ? std::pow(10.0, fy) : fy;
    out << "<text x=\"" << kMarginLeft - 6 << "\" y=\""
        << format_double(kMarginTop + plot_h - plot_h * i / 4.0 + 4)
        << "\" text-anchor=\"end\">" << format_double(label) << "</text>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << spec.height - 8
      << "\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
  out << "<text x=\"14\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << kMarginTop + plot_h / 2 << ")\">"
      << spec.y_label << "</text>\n</g>\n";

  for (const auto& [v, color] : spec.h_lines) {
    if (!(spec.log_y && v <= 0)) {
      out << "<line x1=\"" << kMarginLeft << "\" x2=\"" << kMarginLeft + plot_w << "\" y1=\""
          << format_double(py(v)) << "\" y2=\"" << format_double(py(v)) << "\" stroke=\"" << color
          << "\" stroke-dasharray=\"5,3\"/>\n";
    }
  }
  for (const auto& [v, color] : spec.v_lines) {
    out << "<line y1=\"" << kMarginTop << "\" y2=\"" << kMarginTop + plot_h << "\" x1=\""
        << format_double(px(v)) << "\" x2=\"" << format_double(px(v)) << "\" stroke=\"" << color
        << "\" stroke-dasharray=\"5,3\"/>\n";
  }

  for (const auto& s : spec.series) {
    if (s.points_only) {
      out << "<g fill=\"" << s.color << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double y = spec.log_y && s.y[i] <= 0 ? NAN : s.y[i];
        if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
        out << "<circle cx=\"" << format_double(px(s.x[i])) << "\" cy=\"" << format_double(py(y))
            << "\" r=\"1.5\"/>\n";
      }
      out << "</g>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double y = spec.log_y && s.y[i] <= 0 ? NAN : s.y[i];
        if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
        out << (first ? "" : " ") << format_double(px(s.x[i])) << ',' << format_double(py(y));
        first = false;
      }
      out << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace ergokit
