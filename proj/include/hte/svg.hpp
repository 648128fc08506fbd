#pragma once

#include <string>
#include <vector>

namespace hte {

struct BoxStats {
  double low_whisker, q1, median, q3, high_whisker;
  std::vector<double> outliers;
};

/// Quartiles by nearest rank; whiskers reach the most extreme samples within
/// 1.5 IQR of the box, everything beyond is an outlier.
BoxStats box_stats(const std::vector<double>& samples);

struct Series {
  std::string label;
  std::vector<double> values;
};

std::string svg_boxplot(const std::vector<Series>& groups, const std::string& title, const std::string& ylabel);
std::string svg_bars(const std::vector<std::string>& labels, const std::vector<double>& values, const std::string& title,
                     const std::string& ylabel);

/// Row-major heat map; row 0 is drawn at the bottom. NaN cells are left blank.
std::string svg_heatmap(const std::vector<double>& cells, int cols, int rows, const std::string& title);

}  // namespace hte
