#include <gtest/gtest.h>

#include <cmath>

#include "fptx/error.hpp"
#include "fptx/jacobians.hpp"
#include "fptx/sampling.hpp"

using namespace fptx;

namespace {

double rel_frob(const Mat& a, const Mat& b) { return frobenius(sub(a, b)) / frobenius(b); }

const LayerKind kKinds[] = {LayerKind::Centring,  LayerKind::RMSNorm,   LayerKind::LayerNorm,
                            LayerKind::Affine,    LayerKind::Perceptron, LayerKind::SimScores,
                            LayerKind::Softmax,   LayerKind::Attention,  LayerKind::MatMulPair};

}  // namespace

class JacobianKinds : public ::testing::TestWithParam<LayerKind> {};

TEST_P(JacobianKinds, MatchesFiniteDifferences) {
  CounterRng rng(17, static_cast<std::uint64_t>(GetParam()));
  int checked = 0;
  for (int i = 0; i < 40; ++i) {
    const auto pt = random_layer_point(GetParam(), rng, 5, 4, 6);
    try {
      EXPECT_LE(rel_frob(analytic_jacobian(pt), finite_difference_jacobian(pt)), 1e-6);
      ++checked;
    } catch (const KinkCrossingError&) {
    } catch (const DegenerateInputError&) {
    }
  }
  EXPECT_GE(checked, 30);
}

INSTANTIATE_TEST_SUITE_P(All, JacobianKinds, ::testing::ValuesIn(kKinds),
                         [](const auto& info) { return to_string(info.param); });

TEST(Jacobian, SoftmaxAtZero) {
  const Mat J = jacobian_softmax({0.0, 0.0});
  EXPECT_EQ(J, (Mat{{0.25, -0.25}, {-0.25, 0.25}}));
}

TEST(Jacobian, CentringIsProjection) {
  const Mat J = jacobian_centring(4);
  const Mat J2 = matmul(J, J);
  for (std::size_t i = 0; i < J.size(); ++i) EXPECT_NEAR(J.data()[i], J2.data()[i], 1e-15);
  EXPECT_DOUBLE_EQ(J(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(J(0, 1), -0.25);
}

TEST(Jacobian, MatMulPairIsKronPair) {
  LayerPoint pt;
  pt.kind = LayerKind::MatMulPair;
  pt.input = Mat{{1, 2}, {3, 4}};
  pt.input2 = Mat{{0, 1}, {1, 1}};
  const Mat J = analytic_jacobian(pt);
  ASSERT_EQ(J.rows(), 4u);
  ASSERT_EQ(J.cols(), 8u);
  // d vec(XY) / d vec(X) = Y^T kron I
  const Mat left = kron(pt.input2.transpose(), Mat::identity(2));
  const Mat right = kron(Mat::identity(2), pt.input);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(J(i, j), left(i, j));
      EXPECT_EQ(J(i, j + 4), right(i, j));
    }
}

TEST(Jacobian, KernelChecks) {
  CounterRng rng(23, 0);
  for (auto kind : {LayerKind::Centring, LayerKind::RMSNorm, LayerKind::LayerNorm, LayerKind::Softmax}) {
    const auto pt = random_layer_point(kind, rng, 7, 5, 3);
    const auto rep = jacobian_kernel_checks(pt);
    EXPECT_LE(rep.kernel_residual, 1e-12) << to_string(kind);
    if (!std::isnan(rep.spectral_closed_form))
      EXPECT_NEAR(rep.spectral_norm, rep.spectral_closed_form, 1e-8 * rep.spectral_closed_form) << to_string(kind);
  }
  EXPECT_THROW(jacobian_kernel_checks(random_layer_point(LayerKind::Affine, rng, 3, 3, 3)), CapabilityError);
}

TEST(Jacobian, ReluDegeneracyDetected) {
  LayerPoint pt;
  pt.kind = LayerKind::Perceptron;
  pt.weights.A1 = Mat{{1, -1}};
  pt.weights.b1 = {0.0};
  pt.weights.A2 = Mat{{1}, {1}};
  pt.weights.b2 = {0.0, 0.0};
  pt.input = Mat{{1}, {1}};
  EXPECT_THROW(relu_support(pt.weights, pt.input.col(0)), DegenerateInputError);
  EXPECT_THROW(analytic_jacobian(pt), DegenerateInputError);
}

TEST(Jacobian, KinkCrossingDetected) {
  const VecFn f = [](const Vec& u) { return Vec{std::max(u[0], 0.0)}; };
  const PatternFn pattern = [](const Vec& u) { return std::vector<int>{u[0] > 0}; };
  EXPECT_THROW(finite_difference_jacobian(f, {1e-9}, 1e-6, pattern), KinkCrossingError);
  const Mat J = finite_difference_jacobian(f, {0.5}, 1e-6, pattern);
  EXPECT_NEAR(J(0, 0), 1.0, 1e-10);
}

TEST(LayerNames, RoundTrip) {
  for (auto k : kKinds) EXPECT_EQ(parse_layer_kind(to_string(k)), k);
  EXPECT_THROW(parse_layer_kind("conv"), PreconditionError);
}

TEST(Jacobian, LayerNormVanishesForTwoEntries) {
  LayerPoint pt;
  pt.kind = LayerKind::LayerNorm;
  pt.input = Mat::column({0.3, -1.7});
  EXPECT_LE(max_abs(analytic_jacobian(pt)), 1e-15);
  const auto rep = jacobian_kernel_checks(pt);
  EXPECT_EQ(rep.spectral_closed_form, 0.0);
  EXPECT_LE(rep.spectral_norm, 1e-15);
}
