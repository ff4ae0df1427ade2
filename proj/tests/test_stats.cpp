#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fptx/error.hpp"
#include "fptx/stats.hpp"

using namespace fptx;

TEST(Summarize, SmallSample) {
  const auto s = summarize({1, 2, 3});
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.median, 2.0);
  EXPECT_EQ(s.std, 1.0);
  EXPECT_EQ(s.count, 3u);
  EXPECT_EQ(s.count_inf, 0u);
}

TEST(Summarize, ExcludesInfinity) {
  const auto s = summarize({1, INFINITY});
  EXPECT_EQ(s.mean, 1.0);
  EXPECT_EQ(s.count_inf, 1u);
}

TEST(Summarize, AllInfiniteGivesNaN) {
  const auto s = summarize({INFINITY, INFINITY});
  EXPECT_TRUE(std::isnan(s.mean));
  EXPECT_EQ(s.count_inf, 2u);
}

TEST(Summarize, PercentileLinearInterpolation) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s.p5, 5.95);
  EXPECT_DOUBLE_EQ(s.p95, 95.05);
  EXPECT_DOUBLE_EQ(s.median, 50.5);
  EXPECT_LE(s.p5, s.median);
  EXPECT_LE(s.median, s.p95);
}

TEST(Summarize, HistogramCountsEverySample) {
  const auto s = summarize({0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0});
  ASSERT_EQ(s.histogram.counts.size(), kHistogramBins);
  EXPECT_EQ(s.histogram.zeros, 1u);
  EXPECT_EQ(std::accumulate(s.histogram.counts.begin(), s.histogram.counts.end(), std::size_t{0}), 5u);
  EXPECT_DOUBLE_EQ(s.histogram.log10_lo, -8.0);
  EXPECT_DOUBLE_EQ(s.histogram.log10_hi, 0.0);
  EXPECT_EQ(s.histogram.counts.front(), 1u);
  EXPECT_EQ(s.histogram.counts.back(), 1u);
}

TEST(Fit, SlopeOfExactLine) {
  EXPECT_DOUBLE_EQ(fit_slope({0, 1, 2, 3}, {1, 3, 5, 7}), 2.0);
  EXPECT_THROW(fit_slope({1, 1}, {0, 1}), PreconditionError);
}

TEST(Fit, Spearman) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 25, 100}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  // ties get average ranks
  EXPECT_NEAR(spearman({1, 2, 3}, {1, 1, 2}), std::sqrt(0.75), 1e-12);
}
