#include "hte/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "hte/stats.hpp"

namespace hte {

namespace {

std::string f(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;

void header(std::ostringstream& os, const std::string& title, const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  if (!ylabel.empty())
    os << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2 << ")\" text-anchor=\"middle\">"
       << escape(ylabel) << "</text>\n";
}

// Axis with ticks over [lo, hi]; returns the value-to-pixel map.
struct YAxis {
  double lo, hi;
  double px(double v) const { return H - B - (v - lo) / (hi - lo) * (H - T - B); }
};

YAxis axis(std::ostringstream& os, double lo, double hi) {
  if (hi <= lo) hi = lo + 1;
  const YAxis y{lo, hi};
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = lo + (hi - lo) * i / 5.0;
    os << "<line x1=\"" << L - 4 << "\" y1=\"" << f(y.px(v)) << "\" x2=\"" << L << "\" y2=\"" << f(y.px(v))
       << "\" stroke=\"black\"/><text x=\"" << L - 6 << "\" y=\"" << f(y.px(v) + 4) << "\" text-anchor=\"end\">" << f(v)
       << "</text>\n";
  }
  return y;
}

}  // namespace

BoxStats box_stats(const std::vector<double>& s) {
  if (s.empty()) throw std::invalid_argument("box_stats: no samples");
  BoxStats b;
  b.q1 = percentile_nearest_rank(s, 25);
  b.median = percentile_nearest_rank(s, 50);
  b.q3 = percentile_nearest_rank(s, 75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
  b.low_whisker = b.q1;
  b.high_whisker = b.q3;
  for (double v : s) {
    if (v < lo || v > hi) {
      b.outliers.push_back(v);
    } else {
      b.low_whisker = std::min(b.low_whisker, v);
      b.high_whisker = std::max(b.high_whisker, v);
    }
  }
  std::sort(b.outliers.begin(), b.outliers.end());
  return b;
}

std::string svg_boxplot(const std::vector<Series>& groups, const std::string& title, const std::string& ylabel) {
  std::ostringstream os;
  header(os, title, ylabel);
  double lo = 0, hi = 1;
  for (const auto& g : groups)
    for (double v : g.values) hi = std::max(hi, v);
  const YAxis y = axis(os, lo, hi * 1.05);
  const double slot = (W - L - R) / std::max<std::size_t>(groups.size(), 1);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double cx = L + slot * (i + 0.5), hw = slot * 0.25;
    os << "<text x=\"" << f(cx) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << escape(groups[i].label)
       << "</text>\n";
    if (groups[i].values.empty()) continue;
    const BoxStats b = box_stats(groups[i].values);
    os << "<line x1=\"" << f(cx) << "\" y1=\"" << f(y.px(b.low_whisker)) << "\" x2=\"" << f(cx) << "\" y2=\""
       << f(y.px(b.high_whisker)) << "\" stroke=\"black\"/>\n";
    for (double w : {b.low_whisker, b.high_whisker})
      os << "<line x1=\"" << f(cx - hw / 2) << "\" y1=\"" << f(y.px(w)) << "\" x2=\"" << f(cx + hw / 2) << "\" y2=\""
         << f(y.px(w)) << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << f(cx - hw) << "\" y=\"" << f(y.px(b.q3)) << "\" width=\"" << f(2 * hw) << "\" height=\""
       << f(y.px(b.q1) - y.px(b.q3)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << f(cx - hw) << "\" y1=\"" << f(y.px(b.median)) << "\" x2=\"" << f(cx + hw) << "\" y2=\""
       << f(y.px(b.median)) << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    for (double o : b.outliers)
      os << "<circle cx=\"" << f(cx) << "\" cy=\"" << f(y.px(o)) << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_bars(const std::vector<std::string>& labels, const std::vector<double>& values, const std::string& title,
                     const std::string& ylabel) {
  if (labels.size() != values.size()) throw std::invalid_argument("svg_bars: label/value count mismatch");
  std::ostringstream os;
  header(os, title, ylabel);
  double hi = 1;
  for (double v : values) hi = std::max(hi, v);
  const YAxis y = axis(os, 0, hi * 1.05);
  const double slot = (W - L - R) / std::max<std::size_t>(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cx = L + slot * (i + 0.5), hw = slot * 0.3;
    os << "<rect x=\"" << f(cx - hw) << "\" y=\"" << f(y.px(values[i])) << "\" width=\"" << f(2 * hw)
       << "\" height=\"" << f(y.px(0) - y.px(values[i])) << "\" fill=\"#fd8d3c\" stroke=\"black\"/>\n";
    os << "<text x=\"" << f(cx) << "\" y=\"" << f(y.px(values[i]) - 4) << "\" text-anchor=\"middle\">" << f(values[i])
       << "</text>\n";
    os << "<text x=\"" << f(cx) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << escape(labels[i])
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_heatmap(const std::vector<double>& cells, int cols, int rows, const std::string& title) {
  if (cols <= 0 || rows <= 0 || cells.size() != static_cast<std::size_t>(cols) * rows)
    throw std::invalid_argument("svg_heatmap: cell count does not match the grid");
  double lo = INFINITY, hi = -INFINITY;
  for (double v : cells)
    if (!std::isnan(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  const double side = 400.0 / std::max(cols, rows);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(cols * side + 20) << "\" height=\""
     << f(rows * side + 50) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"10\" y=\"20\" font-size=\"14\">" << escape(title) << " (min " << f(lo) << ", max " << f(hi)
     << ")</text>\n";
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double v = cells[static_cast<std::size_t>(r) * cols + c];
      if (std::isnan(v)) continue;
      const double t = hi > lo ? (v - lo) / (hi - lo) : 1.0;
      const int red = static_cast<int>(std::lround(255 * t)), blue = 255 - red;
      os << "<rect x=\"" << f(10 + c * side) << "\" y=\"" << f(40 + (rows - 1 - r) * side) << "\" width=\"" << f(side)
         << "\" height=\"" << f(side) << "\" fill=\"rgb(" << red << ",60," << blue << ")\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

}  // namespace hte
