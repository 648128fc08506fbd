#pragma once

#include <span>
#include <vector>

namespace hte {

/// Element at rank ceil(p/100 * n) of the sorted samples (no interpolation).
/// Throws std::invalid_argument on empty input or p outside (0, 100].
double percentile_nearest_rank(std::span<const double> samples, double p);

/// Ranks starting at 1; tied values share their mean rank.
std::vector<double> midranks(std::span<const double> v);

struct MannWhitney {
  double u = 0.0;  // statistic of the first sample
  double p = 1.0;  // two-sided
  bool exact = false;
};

/// Wilcoxon-Mann-Whitney rank-sum test. When both samples have at most 20
/// values the null distribution is enumerated over the observed (tied) ranks;
/// otherwise a tie-corrected normal approximation with continuity correction is used.
MannWhitney mannwhitney_u(std::span<const double> a, std::span<const double> b);

/// Spearman rank correlation; NaN if either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace hte
