#pragma once

#include <cstddef>
#include <vector>

namespace fptx {

inline constexpr std::size_t kHistogramBins = 40;

struct Histogram {
  double log10_lo = 0.0;
  double log10_hi = 0.0;
  std::vector<std::size_t> counts;  // kHistogramBins entries over log10 of positive samples
  std::size_t zeros = 0;            // exact-zero samples (no logarithm)
};

// Summary of a batch of error samples. Infinite and NaN samples are counted
// in count_inf and excluded from every other field.
struct ErrorStats {
  std::size_t count = 0;  // finite samples
  std::size_t count_inf = 0;
  double mean = 0.0;
  double median = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  Histogram histogram;
};

// Linear-interpolation percentile of sorted data, q in [0, 1].
double percentile_sorted(const std::vector<double>& sorted, double q);

ErrorStats summarize(const std::vector<double>& samples);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fptx
