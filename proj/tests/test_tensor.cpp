#include <gtest/gtest.h>

#include <cmath>

#include "fptx/error.hpp"
#include "fptx/tensor.hpp"

using namespace fptx;

TEST(Mat, VecIsColumnMajor) {
  const Mat m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(vec(m), (Vec{1, 4, 2, 5, 3, 6}));
  EXPECT_EQ(unvec(vec(m), 2, 3), m);
}

TEST(Mat, KronSmall) {
  const Mat a{{1, 2}, {3, 4}};
  const Mat b{{0, 1}, {1, 0}};
  const Mat k = kron(a, b);
  const Mat expect{{0, 1, 0, 2}, {1, 0, 2, 0}, {0, 3, 0, 4}, {3, 0, 4, 0}};
  EXPECT_EQ(k, expect);
}

TEST(Mat, KronMixedProductWithVec) {
  // vec(A X B) = (B^T kron A) vec(X)
  const Mat A{{1, -2}, {0, 3}};
  const Mat X{{2, 1, 0}, {-1, 4, 2}};
  const Mat B{{1, 0}, {2, 1}, {0, -1}};
  const Vec lhs = vec(matmul(matmul(A, X), B));
  const Vec rhs = matvec(kron(B.transpose(), A), vec(X));
  for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_DOUBLE_EQ(lhs[i], rhs[i]);
}

TEST(Norms, VectorNorms) {
  const Vec x{3, -4, 0};
  EXPECT_EQ(norm1(x), 7.0);
  EXPECT_EQ(norm2(x), 5.0);
  EXPECT_EQ(norm_inf(x), 4.0);
  EXPECT_EQ(min_abs(x), 0.0);
  EXPECT_EQ(dual(Norm::One), Norm::Inf);
  EXPECT_EQ(dual(Norm::Two), Norm::Two);
}

TEST(Norms, Norm2AvoidsOverflow) { EXPECT_DOUBLE_EQ(norm2(Vec{3e200, 4e200}), 5e200); }

TEST(Norms, InducedNorms) {
  const Mat m{{3, 0}, {4, 5}};
  EXPECT_EQ(induced_norm(m, Norm::One, Norm::One), 7.0);    // max column sum
  EXPECT_EQ(induced_norm(m, Norm::Inf, Norm::Inf), 9.0);    // max row sum
  EXPECT_EQ(induced_norm(m, Norm::One, Norm::Inf), 5.0);    // max entry
  EXPECT_NEAR(induced_norm(m, Norm::Two, Norm::Two), std::sqrt(45.0), 1e-12);
  EXPECT_NEAR(induced_norm(m, Norm::One, Norm::Two), 5.0, 1e-12);  // max column 2-norm
  EXPECT_NEAR(induced_norm(m, Norm::Two, Norm::Inf), std::sqrt(41.0), 1e-12);
  EXPECT_THROW(induced_norm(m, Norm::Two, Norm::One), CapabilityError);
}

TEST(Svd, KnownSpectra) {
  const auto s = singular_values(Mat{{3, 0}, {4, 5}});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0], std::sqrt(45.0), 1e-12);
  EXPECT_NEAR(s[1], std::sqrt(5.0), 1e-12);
  const auto e = sv_extremes(Mat::diag({-2, 3, 1}));
  EXPECT_NEAR(e.sigma_max, 3.0, 1e-14);
  EXPECT_NEAR(e.sigma_min, 1.0, 1e-14);
  const auto wide = sv_extremes(Mat{{1, 0, 0}, {0, 2, 0}});
  EXPECT_NEAR(wide.sigma_max, 2.0, 1e-14);
  EXPECT_NEAR(wide.sigma_min, 1.0, 1e-14);
  EXPECT_NEAR(sv_extremes(Mat{{1, 1}, {1, 1}}).sigma_min, 0.0, 1e-14);
}

TEST(Distances, Componentwise) {
  EXPECT_EQ(rel_dist_componentwise(Vec{1, 0}, Vec{1, 0}), 0.0);
  EXPECT_TRUE(std::isinf(rel_dist_componentwise(Vec{1, 1e-30}, Vec{1, 0})));
  EXPECT_DOUBLE_EQ(rel_dist_componentwise(Vec{1.1, -2.0}, Vec{1.0, -2.5}), 0.2);
}

TEST(Distances, Normwise) {
  EXPECT_DOUBLE_EQ(rel_dist_normwise(Vec{3, 4}, Vec{0, 0.0 + 5.0}, Norm::Two), std::sqrt(9.0 + 1.0) / 5.0);
  EXPECT_THROW(rel_dist_normwise(Vec{1}, Vec{0}, Norm::Two), DegenerateInputError);
  const Mat a{{1, 0}, {0, 2}}, b{{1, 0}, {0, 1}};
  EXPECT_DOUBLE_EQ(rel_dist_columnwise(a, b), 1.0);
}
