#include <gtest/gtest.h>

#include <cmath>

#include "fptx/conditioning.hpp"
#include "fptx/error.hpp"
#include "fptx/sampling.hpp"

using namespace fptx;

TEST(ClosedForm, CentringHandValue) {
  // c x = (-1, 0, 1) has a zero entry.
  EXPECT_TRUE(std::isinf(cond_cc_centring({1, 2, 3})));
  // x = (1, 2, 4): c x = (-4/3, -1/3, 5/3); (|J||x|)_i / |c x|_i
  const double k = cond_cc_centring({1, 2, 4});
  // |J| = [[2/3,1/3,1/3],[1/3,2/3,1/3],[1/3,1/3,2/3]] -> |J||x| = (8/3, 3, 11/3)
  EXPECT_NEAR(k, 3.0 / (1.0 / 3.0), 1e-12);
}

TEST(ClosedForm, AffineHandValue) {
  const Mat A{{1, -1}, {2, 0}};
  // y = (0.5, 2) for x = (1, 0.5), b = 0: |A||x| = (1.5, 2)
  EXPECT_NEAR(cond_cc_affine(A, {1, 0.5}, {0, 0}), 3.0, 1e-15);
}

class ExactKinds : public ::testing::TestWithParam<LayerKind> {};

TEST_P(ExactKinds, GenericEqualsClosedForm) {
  CounterRng rng(31, static_cast<std::uint64_t>(GetParam()));
  for (int i = 0; i < 25; ++i) {
    const auto pt = random_layer_point(GetParam(), rng, 5, 4, 6);
    for (auto ck : {CondKind::Normwise, CondKind::Mixed, CondKind::Componentwise}) {
      const auto cf = condition_closed_form(pt, ck);
      if (!cf || !cf->exact) continue;
      const double g = condition_generic(pt, ck);
      EXPECT_NEAR(cf->value, g, 1e-10 * std::max(1.0, g)) << to_string(ck);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, ExactKinds,
                         ::testing::Values(LayerKind::Centring, LayerKind::RMSNorm, LayerKind::Softmax,
                                           LayerKind::Affine),
                         [](const auto& info) { return to_string(info.param); });

class BoundKinds : public ::testing::TestWithParam<LayerKind> {};

TEST_P(BoundKinds, ClosedFormDominates) {
  CounterRng rng(37, static_cast<std::uint64_t>(GetParam()));
  int compared = 0;
  for (int i = 0; i < 25; ++i) {
    const auto pt = random_layer_point(GetParam(), rng, 5, 4, 6);
    for (auto ck : {CondKind::Mixed, CondKind::Componentwise}) {
      const auto cf = condition_closed_form(pt, ck);
      if (!cf) continue;
      EXPECT_GE(cf->value * (1 + 1e-12), condition_generic(pt, ck)) << to_string(ck);
      ++compared;
    }
  }
  EXPECT_GT(compared, 0);
}

INSTANTIATE_TEST_SUITE_P(All, BoundKinds,
                         ::testing::Values(LayerKind::LayerNorm, LayerKind::SimScores, LayerKind::Attention),
                         [](const auto& info) { return to_string(info.param); });

TEST(Xi, SpectralBoundFailsOnOrthogonalColumns) {
  // x_1^T x_2 = 0 makes a score vanish while the magnitude sum does not.
  BlockWeights w;
  w.Wq = w.Wk = Mat::identity(2);
  const Mat X{{1, 1}, {1, -1}};
  EXPECT_TRUE(std::isinf(xi_factor(XiWhich::SimScores, w, X)));
  EXPECT_DOUBLE_EQ(xi_simscores_spectral_bound(w.Wq, w.Wk), 1.0);
}

TEST(Xi, SpectralBoundHoldsForSingleColumnSpd) {
  BlockWeights w;
  w.Wk = Mat::identity(2);
  w.Wq = Mat{{2, 1}, {1, 3}};  // SPD product
  CounterRng rng(41, 0);
  for (int i = 0; i < 50; ++i) {
    const Mat X = random_matrix(rng, 2, 1);
    EXPECT_LE(xi_factor(XiWhich::SimScores, w, X), xi_simscores_spectral_bound(w.Wq, w.Wk) * (1 + 1e-12));
  }
}

TEST(Xi, NoCancellationGivesOne) {
  BlockWeights w;
  w.A1 = Mat{{1, 2}};
  w.b1 = {0.0};
  w.A2 = Mat{{1}, {1}};
  w.b2 = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(xi_factor(XiWhich::Perceptron, w, Mat{{1}, {5}}), 1.0);
}

TEST(Spectral, SingularProductThrows) {
  EXPECT_THROW(spectral_data(Mat{{1, 1}, {1, 1}}, Mat::identity(2)), SingularityError);
  const auto s = spectral_data(Mat::diag({2, 1}), Mat::identity(2));
  EXPECT_DOUBLE_EQ(s.sigma_max, 2.0);
  EXPECT_DOUBLE_EQ(s.sigma_min, 1.0);
  EXPECT_DOUBLE_EQ(s.sigma_abs, 2.0);
}

TEST(Generic, UnsupportedNormPairThrows) {
  CounterRng rng(43, 0);
  const auto pt = random_layer_point(LayerKind::Affine, rng, 3, 3, 3);
  EXPECT_THROW(condition_generic(pt, CondKind::Normwise, Norm::Two, Norm::One), CapabilityError);
}
