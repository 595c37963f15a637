#include "wmbind/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wmbind {

namespace {

std::string hex_color(int r, int g, int b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string color_for(double v, double lo, double hi, Palette pal) {
  if (pal == Palette::error) return v != 0.0 ? hex_color(214, 39, 40) : hex_color(199, 233, 192);
  double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
  if (!std::isfinite(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const int level = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  return hex_color(level, level, level);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_heatmap(const Matrix& m, const HeatmapOptions& opts) {
  if (m.rows == 0 || m.cols == 0) throw std::invalid_argument("svg_heatmap: empty matrix");
  double lo = opts.lo, hi = opts.hi;
  if (opts.auto_range) {
    const auto [mn, mx] = std::minmax_element(m.data.begin(), m.data.end());
    lo = *mn;
    hi = *mx;
  }
  const int cell = std::max(1, opts.cell_px);
  const int top = opts.title.empty() ? 0 : 20;
  const auto width = static_cast<long>(m.cols) * cell;
  const auto height = static_cast<long>(m.rows) * cell + top;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" shape-rendering=\"crispEdges\">\n";
  if (!opts.title.empty())
    os << "<text x=\"2\" y=\"14\" font-family=\"sans-serif\" font-size=\"12\">" << escape(opts.title) << "</text>\n";
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c)
      os << "<rect class=\"cell\" x=\"" << static_cast<long>(c) * cell << "\" y=\""
         << static_cast<long>(r) * cell + top << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
         << color_for(m(r, c), lo, hi, opts.palette) << "\"/>\n";
  os << "</svg>\n";
  return os.str();
}

void emit_heatmap(const Matrix& m, const std::filesystem::path& path, const HeatmapOptions& opts) {
  const std::string svg = svg_heatmap(m, opts);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("emit_heatmap: cannot open " + path.string());
  f << svg;
  if (!f) throw std::runtime_error("emit_heatmap: write failed for " + path.string());
}

}  // namespace wmbind
