#include "cofine/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cofine/errors.hpp"

namespace cofine::plot {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range data_range(const std::vector<Series>& series, bool x_axis) {
  Range r{std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  for (const Series& s : series) {
    const std::vector<double>& v = x_axis ? s.xs : s.ys;
    for (const double value : v) {
      r.lo = std::min(r.lo, value);
      r.hi = std::max(r.hi, value);
    }
  }
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) return {0.0, 1.0};
  if (r.lo == r.hi) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

// Round tick spacing to 1/2/5 x 10^k.
double nice_step(double span, int target_ticks) {
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  if (norm < 1.5) return mag;
  if (norm < 3.5) return 2.0 * mag;
  if (norm < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

std::string tick_label(double v) {
  std::ostringstream out;
  if (std::abs(v) >= 1e5 || (std::abs(v) < 1e-3 && v != 0.0)) {
    out.precision(2);
    out << std::scientific << v;
  } else {
    out.precision(6);
    out << v;
  }
  return out.str();
}

}  // namespace

void write_line_chart(const std::filesystem::path& path,
                      const std::vector<Series>& series,
                      const ChartOptions& options) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open plot file: " + path.string());

  const int width = options.width;
  const int height = options.height;
  const int margin_left = 70, margin_right = 160, margin_top = 40,
            margin_bottom = 55;
  const double plot_w = width - margin_left - margin_right;
  const double plot_h = height - margin_top - margin_bottom;

  const Range xr = data_range(series, true);
  const Range yr = data_range(series, false);
  const auto x_pos = [&](double v) {
    return margin_left + (v - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  const auto y_pos = [&](double v) {
    return margin_top + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' viewBox='0 0 " << width << ' ' << height
      << "'>\n";
  out << "<rect width='" << width << "' height='" << height
      << "' fill='white'/>\n";
  out << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='16'>" << options.title
      << "</text>\n";

  // axes box
  out << "<rect x='" << margin_left << "' y='" << margin_top << "' width='"
      << plot_w << "' height='" << plot_h
      << "' fill='none' stroke='#333' stroke-width='1'/>\n";

  const double x_step = nice_step(xr.hi - xr.lo, 6);
  for (double v = std::ceil(xr.lo / x_step) * x_step; v <= xr.hi + 1e-9 * x_step;
       v += x_step) {
    const double px = x_pos(v);
    out << "<line x1='" << px << "' y1='" << margin_top + plot_h << "' x2='"
        << px << "' y2='" << margin_top + plot_h + 5
        << "' stroke='#333' stroke-width='1'/>\n";
    out << "<text x='" << px << "' y='" << margin_top + plot_h + 20
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << tick_label(v) << "</text>\n";
  }
  const double y_step = nice_step(yr.hi - yr.lo, 6);
  for (double v = std::ceil(yr.lo / y_step) * y_step; v <= yr.hi + 1e-9 * y_step;
       v += y_step) {
    const double py = y_pos(v);
    out << "<line x1='" << margin_left - 5 << "' y1='" << py << "' x2='"
        << margin_left << "' y2='" << py
        << "' stroke='#333' stroke-width='1'/>\n";
    out << "<text x='" << margin_left - 8 << "' y='" << py + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
        << tick_label(v) << "</text>\n";
    out << "<line x1='" << margin_left << "' y1='" << py << "' x2='"
        << margin_left + plot_w << "' y2='" << py
        << "' stroke='#eee' stroke-width='1'/>\n";
  }

  out << "<text x='" << margin_left + plot_w / 2 << "' y='" << height - 12
      << "' text-anchor='middle' font-family='sans-serif' font-size='13'>"
      << options.x_label << "</text>\n";
  out << "<text x='18' y='" << margin_top + plot_h / 2
      << "' text-anchor='middle' font-family='sans-serif' font-size='13' "
      << "transform='rotate(-90 18 " << margin_top + plot_h / 2 << ")'>"
      << options.y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6'";
    if (series[s].dashed) out << " stroke-dasharray='6 4'";
    out << " points='";
    const std::size_t n = std::min(series[s].xs.size(), series[s].ys.size());
    // thin dense curves so files stay small
    const std::size_t stride = std::max<std::size_t>(1, n / 1200);
    for (std::size_t i = 0; i < n; i += stride) {
      out << x_pos(series[s].xs[i]) << ',' << y_pos(series[s].ys[i]) << ' ';
    }
    if (n > 0 && (n - 1) % stride != 0)
      out << x_pos(series[s].xs[n - 1]) << ',' << y_pos(series[s].ys[n - 1]);
    out << "'/>\n";

    const double ly = margin_top + 16 + 18.0 * s;
    out << "<line x1='" << margin_left + plot_w + 12 << "' y1='" << ly
        << "' x2='" << margin_left + plot_w + 36 << "' y2='" << ly
        << "' stroke='" << color << "' stroke-width='2'";
    if (series[s].dashed) out << " stroke-dasharray='6 4'";
    out << "/>\n";
    out << "<text x='" << margin_left + plot_w + 42 << "' y='" << ly + 4
        << "' font-family='sans-serif' font-size='12'>" << series[s].label
        << "</text>\n";
  }

  out << "</svg>\n";
  if (!out.good()) throw IoError("write failed: " + path.string());
}

}  // namespace cofine::plot
