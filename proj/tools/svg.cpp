#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace wgm::cli {

namespace {

constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 55;
const char *palette[] = {"#1f4e9c", "#c0392b", "#27864a", "#7d3c98", "#b9770e", "#555555"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

// 1-2-5 tick step
double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10 * mag;
}

} // namespace

std::string render_svg(const Plot &plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto &s : plot.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double sx = nice_step(x1 - x0), sy = nice_step(y1 - y0);
  for (double t = std::ceil(x0 / sx) * sx; t <= x1 + 1e-9 * sx; t += sx)
    o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << H - B << "\" x2=\"" << num(px(t)) << "\" y2=\"" << H - B + 5
      << "\" stroke=\"black\"/><text x=\"" << num(px(t)) << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"middle\">" << num(std::abs(t) < 1e-12 * sx ? 0.0 : t) << "</text>\n";
  for (double t = std::ceil(y0 / sy) * sy; t <= y1 + 1e-9 * sy; t += sy)
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << num(py(t)) << "\" x2=\"" << L << "\" y2=\"" << num(py(t))
      << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << num(py(t) + 4)
      << "\" text-anchor=\"end\">" << num(std::abs(t) < 1e-12 * sy ? 0.0 : t) << "</text>\n";
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << escape(plot.xlabel) << "</text>\n";
  o << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto &s = plot.series[k];
    const char *color = palette[k % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    o << "\"/>\n";
    if (!s.name.empty() && k < 20)
      o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 14 + 16 * k << "\" fill=\"" << color << "\">"
        << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

} // namespace wgm::cli
