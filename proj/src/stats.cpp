#include "hte/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hte {

double percentile_nearest_rank(std::span<const double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("percentile: no samples");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile: p must lie in (0, 100]");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, s.size());
  return s[rank - 1];
}

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mid = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mid;
    i = j + 1;
  }
  return r;
}

namespace {

// Null distribution of twice the rank sum of `na` values drawn from `doubled`.
double exact_two_sided(const std::vector<long>& doubled, std::size_t na, long observed) {
  const long total = std::accumulate(doubled.begin(), doubled.end(), 0L);
  // ways[k][s]: subsets of size k with doubled rank sum s.
  std::vector<std::vector<double>> ways(na + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  ways[0][0] = 1.0;
  for (long r : doubled)
    for (std::size_t k = na; k >= 1; --k)
      for (long s = total; s >= r; --s) ways[k][s] += ways[k - 1][s - r];
  double all = 0.0, le = 0.0, ge = 0.0;
  for (long s = 0; s <= total; ++s) {
    const double w = ways[na][s];
    all += w;
    if (s <= observed) le += w;
    if (s >= observed) ge += w;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / all);
}

}  // namespace

MannWhitney mannwhitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mannwhitney_u: both samples must be non-empty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> r = midranks(pooled);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ra = std::accumulate(r.begin(), r.begin() + static_cast<long>(a.size()), 0.0);
  MannWhitney out;
  out.u = ra - na * (na + 1.0) / 2.0;

  if (a.size() <= 20 && b.size() <= 20) {
    std::vector<long> doubled;
    for (double x : r) doubled.push_back(std::lround(2.0 * x));
    out.p = exact_two_sided(doubled, a.size(), std::lround(2.0 * ra));
    out.exact = true;
    return out;
  }

  const double n = na + nb;
  double ties = 0.0;
  std::vector<double> s = r;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double mu = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (var <= 0.0) return out;
  const double big = std::max(out.u, na * nb - out.u);
  const double z = (big - mu - 0.5) / std::sqrt(var);
  out.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman: samples differ in length");
  if (a.size() < 2) throw std::invalid_argument("spearman: need at least two pairs");
  const auto ra = midranks(a), rb = midranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace hte
