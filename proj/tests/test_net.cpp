#include <gtest/gtest.h>

#include <cmath>

#include "fptx/errbounds.hpp"
#include "fptx/error.hpp"
#include "fptx/net.hpp"
#include "fptx/sampling.hpp"

using namespace fptx;

namespace {
const Arith kExact;
}

TEST(Normalization, CentringAndLayerNorm) {
  EXPECT_EQ(centring({1, 2, 3}, kExact), (Vec{-1, 0, 1}));
  const Vec y = layer_norm({1, 2, 3}, kExact);
  EXPECT_NEAR(y[0], -std::sqrt(1.5), 1e-15);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_NEAR(y[2], std::sqrt(1.5), 1e-15);
  EXPECT_THROW(layer_norm({2, 2, 2}, kExact), DegenerateInputError);
}

TEST(Normalization, RmsNorm) {
  const Vec y = rms_norm({3, 4}, kExact);
  EXPECT_NEAR(y[0], std::sqrt(2.0) * 0.6, 1e-15);
  EXPECT_NEAR(y[1], std::sqrt(2.0) * 0.8, 1e-15);
  EXPECT_NEAR(norm2(rms_norm({1, -2, 5, 0.5}, kExact)), 2.0, 1e-14);
}

TEST(Softmax, ShiftedEqualsUnshifted) {
  const Vec s{0.5, -1.0, 3.0, 2.0};
  const Vec a = softmax(s, kExact, SoftmaxMode::Unshifted);
  const Vec b = softmax(s, kExact, SoftmaxMode::Shifted);
  double sum = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], 1e-15);
    sum += a[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(Softmax, UnshiftedRefusesOverflow) {
  EXPECT_THROW(softmax({800.0, 0.0}, kExact, SoftmaxMode::Unshifted), DomainError);
  const Vec p = softmax({800.0, 0.0}, kExact, SoftmaxMode::Shifted);
  EXPECT_EQ(p[0], 1.0);
}

TEST(Rounded, DotRoundsEveryStep) {
  const Arith d1(PrecisionSpec::decimal(1));
  // 0.4*0.4 = 0.16 -> 0.2; 0.2 + 0.16 -> 0.4 (0.36) -> 0.4
  EXPECT_DOUBLE_EQ(fl_dot({0.4, 0.4}, {0.4, 0.4}, d1), 0.4);
  EXPECT_EQ(fl_dot({1, 2, 3}, {4, 5, 6}, kExact), 32.0);
}

TEST(Attention, SingleTokenReturnsValue) {
  BlockWeights w;
  w.Wq = w.Wk = Mat::identity(2);
  w.Wv = Mat{{2, 0}, {0, 3}};
  const Mat X{{1}, {-1}};
  const Mat out = self_attention(w, X, kExact);
  EXPECT_EQ(out, (Mat{{2}, {-3}}));
}

TEST(Attention, IsCausal) {
  CounterRng rng(1, 0);
  const auto w = random_weights(rng, 3, 4);
  Mat X = random_matrix(rng, 3, 4);
  const Mat a = self_attention(w, X, kExact);
  X(1, 3) += 1.0;
  const Mat b = self_attention(w, X, kExact);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(a.col(t), b.col(t));
  EXPECT_NE(a.col(3), b.col(3));
}

TEST(Block, ResidualOnlyNetworkIsExact) {
  CounterRng rng(2, 0);
  TransformerConfig cfg = random_config(rng, 4, 5, 3, NormVariant::Layer);
  for (auto& w : cfg.layers) {
    w.Wv = Mat(4, 4);
    w.A2 = Mat(4, 5);
    w.b2 = Vec(4, 0.0);
  }
  const auto p = PrecisionSpec::decimal(4);
  const Mat X = quantize(random_matrix(rng, 4, 3), p);
  const auto taps = deep_transformer(cfg, X, Arith(p));
  ASSERT_EQ(taps.size(), 4u);
  for (const auto& t : taps) EXPECT_EQ(t, X);
}

TEST(Block, PlacementsDiffer) {
  CounterRng rng(3, 0);
  TransformerConfig cfg = random_config(rng, 4, 5, 1, NormVariant::RMS);
  const Mat X = random_matrix(rng, 4, 3);
  const Mat pre = transformer_block(cfg, 0, X, kExact);
  cfg.placement = Placement::PostAttention;
  const Mat post = transformer_block(cfg, 0, X, kExact);
  EXPECT_NE(pre, post);
}

TEST(Block, LowPrecisionErrorScalesWithDigits) {
  CounterRng rng(4, 0);
  const TransformerConfig cfg = random_config(rng, 6, 8, 2, NormVariant::Layer, 0.5);
  const Mat X = random_matrix(rng, 6, 4);
  double prev = INFINITY;
  for (int s : {3, 6, 9, 12}) {
    const auto p = PrecisionSpec::decimal(s);
    const auto qc = quantize(cfg, p);
    const Mat qx = quantize(X, p);
    const auto e = compare(deep_transformer(qc, qx, Arith(p)).back(), deep_transformer(qc, qx, kExact).back());
    EXPECT_LT(e.normwise, prev);
    EXPECT_LT(e.normwise, 1e4 * p.unit_roundoff());
    prev = e.normwise;
  }
}

TEST(Config, ValidateRejectsShapes) {
  CounterRng rng(5, 0);
  TransformerConfig cfg = random_config(rng, 4, 5, 1, NormVariant::RMS);
  cfg.layers[0].A1 = Mat(5, 3);
  EXPECT_THROW(cfg.validate(), PreconditionError);
}

TEST(Quantize, Idempotent) {
  CounterRng rng(6, 0);
  const auto p = PrecisionSpec::decimal(3);
  const Mat q = quantize(random_matrix(rng, 3, 3), p);
  EXPECT_EQ(quantize(q, p), q);
}

TEST(Names, RoundTrip) {
  EXPECT_EQ(parse_variant(to_string(NormVariant::RMS)), NormVariant::RMS);
  EXPECT_EQ(parse_variant(to_string(NormVariant::Layer)), NormVariant::Layer);
  EXPECT_EQ(parse_placement(to_string(Placement::PostAttention)), Placement::PostAttention);
  EXPECT_THROW(parse_variant("batch"), PreconditionError);
}
