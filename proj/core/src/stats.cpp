#include "fptx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fptx/error.hpp"

namespace fptx {

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ErrorStats summarize(const std::vector<double>& samples) {
  ErrorStats s;
  std::vector<double> v;
  v.reserve(samples.size());
  for (double x : samples) {
    if (std::isfinite(x))
      v.push_back(x);
    else
      ++s.count_inf;
  }
  s.count = v.size();
  s.histogram.counts.assign(kHistogramBins, 0);
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = s.median = s.p5 = s.p95 = s.std = nan;
    return s;
  }
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  s.median = percentile_sorted(v, 0.5);
  s.p5 = percentile_sorted(v, 0.05);
  s.p95 = percentile_sorted(v, 0.95);

  std::vector<double> logs;
  for (double x : v) {
    if (x > 0.0)
      logs.push_back(std::log10(x));
    else
      ++s.histogram.zeros;
  }
  if (!logs.empty()) {
    double lo = std::floor(logs.front());
    double hi = std::ceil(logs.back());
    if (hi <= lo) hi = lo + 1.0;
    s.histogram.log10_lo = lo;
    s.histogram.log10_hi = hi;
    const double width = (hi - lo) / static_cast<double>(kHistogramBins);
    for (double l : logs) {
      auto b = static_cast<std::size_t>((l - lo) / width);
      s.histogram.counts[std::min(b, kHistogramBins - 1)]++;
    }
  }
  return s;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_slope: need matching samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw PreconditionError("fit_slope: x values are all equal");
  return sxy / sxx;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("spearman: need matching samples");
  return pearson(ranks(x), ranks(y));
}

}  // namespace fptx
