#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "fptx/error.hpp"
#include "fptx/fparith.hpp"

using namespace fptx;

TEST(Rounding, DecimalHandValues) {
  EXPECT_EQ(round_decimal(2.0 / 3.0, 4), 0.6667);
  EXPECT_EQ(round_decimal(-2.0 / 3.0, 4), -0.6667);
  EXPECT_EQ(round_decimal(123456.0, 3), 123000.0);
  EXPECT_EQ(round_decimal(0.00123456, 2), 0.0012);
  EXPECT_EQ(round_decimal(9.9996, 4), 10.0);
  EXPECT_EQ(round_decimal(1e300 / 3.0, 2), 3.3e299);
  EXPECT_EQ(round_decimal(0.0, 5), 0.0);
}

TEST(Rounding, DecimalTiesToEven) {
  // 0.125 and 2.5 are exact binary ties.
  EXPECT_EQ(round_decimal(0.125, 2), 0.12);
  EXPECT_EQ(round_decimal(0.375, 2), 0.38);
  EXPECT_EQ(round_decimal(2.5, 1), 2.0);
  EXPECT_EQ(round_decimal(3.5, 1), 4.0);
  EXPECT_EQ(round_decimal(-2.5, 1), -2.0);
  // 0.135 is stored slightly above the tie.
  EXPECT_EQ(round_decimal(0.135, 2), 0.14);
}

TEST(Rounding, DecimalMatchesPrintfPath) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-40, 40), digits(1, 15);
  char buf[64];
  for (int i = 0; i < 20000; ++i) {
    const double x = mant(gen) * std::pow(10.0, ex(gen));
    const int s = digits(gen);
    std::snprintf(buf, sizeof buf, "%.*e", s - 1, x);
    EXPECT_EQ(round_decimal(x, s), std::strtod(buf, nullptr)) << x << " digits " << s;
  }
}

TEST(Rounding, BinaryTiesAndCarries) {
  const double e = std::ldexp(1.0, -24);
  EXPECT_EQ(round_binary(1.0 + e, 24), 1.0);
  EXPECT_EQ(round_binary(1.0 + 3 * e, 24), 1.0 + 4 * e);
  EXPECT_EQ(round_binary(2.0 - e / 2, 24), 2.0);
  EXPECT_EQ(round_binary(-(1.0 + 3 * e), 24), -(1.0 + 4 * e));
  EXPECT_EQ(round_binary(0.1, 53), 0.1);
}

TEST(Rounding, BinaryMatchesFloat) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 100000; ++i) {
    std::uint64_t bits = gen();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    if (!std::isfinite(x) || std::fabs(x) > 3e38 || std::fabs(x) < 1e-37) continue;
    EXPECT_EQ(round_binary(x, 24), static_cast<double>(static_cast<float>(x))) << x;
  }
}

TEST(Rounding, SubnormalInputKeepsRelativeAccuracy) {
  const double x = 1.2345e-310;
  const double r = round_binary(x, 10);
  EXPECT_LE(std::fabs(r - x) / x, std::ldexp(1.0, -10));
  EXPECT_EQ(round_binary(r, 10), r);
}

TEST(Rounding, Idempotent) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 1000; ++i) {
    const double x = nd(gen) * 1e3;
    for (int s : {1, 4, 8, 15}) EXPECT_EQ(round_decimal(round_decimal(x, s), s), round_decimal(x, s));
    for (int t : {2, 11, 24}) EXPECT_EQ(round_binary(round_binary(x, t), t), round_binary(x, t));
  }
}

TEST(Rounding, SpecialValuesPassThrough) {
  EXPECT_TRUE(std::isinf(round_decimal(INFINITY, 4)));
  EXPECT_TRUE(std::isnan(round_binary(NAN, 8)));
}

TEST(Precision, UnitRoundoff) {
  EXPECT_EQ(PrecisionSpec::binary(24).unit_roundoff(), std::ldexp(1.0, -24));
  EXPECT_DOUBLE_EQ(PrecisionSpec::decimal(4).unit_roundoff(), 5e-4);
  EXPECT_EQ(PrecisionSpec::native().unit_roundoff(), std::ldexp(1.0, -53));
}

TEST(Precision, ParseAndPrint) {
  EXPECT_EQ(PrecisionSpec::parse("d:6"), PrecisionSpec::decimal(6));
  EXPECT_EQ(PrecisionSpec::parse("b:11"), PrecisionSpec::binary(11));
  EXPECT_EQ(PrecisionSpec::parse("native"), PrecisionSpec::native());
  EXPECT_EQ(PrecisionSpec::parse(PrecisionSpec::decimal(8).str()), PrecisionSpec::decimal(8));
  EXPECT_THROW(PrecisionSpec::parse("x:3"), PreconditionError);
  EXPECT_THROW(PrecisionSpec::parse("d:"), PreconditionError);
  EXPECT_THROW(PrecisionSpec::decimal(0), PreconditionError);
  EXPECT_THROW(PrecisionSpec::decimal(16), PreconditionError);
  EXPECT_THROW(PrecisionSpec::binary(54), PreconditionError);
}

TEST(Operations, RelativeErrorWithinUnitRoundoff) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ud(0.1, 10.0);
  for (const auto& p : {PrecisionSpec::decimal(4), PrecisionSpec::binary(11)}) {
    const double u = p.unit_roundoff();
    for (int i = 0; i < 5000; ++i) {
      const double a = ud(gen), b = ud(gen);
      EXPECT_LE(std::fabs(fl_bin(BinOp::Add, a, b, p) - (a + b)), u * (a + b));
      EXPECT_LE(std::fabs(fl_bin(BinOp::Mul, a, b, p) - a * b), u * a * b);
      EXPECT_LE(std::fabs(fl_bin(BinOp::Div, a, b, p) - a / b), u * a / b);
      EXPECT_LE(std::fabs(fl_unary(UnaryOp::Sqrt, a, p) - std::sqrt(a)), u * std::sqrt(a));
    }
  }
}

TEST(Operations, DomainErrors) {
  const auto p = PrecisionSpec::decimal(6);
  EXPECT_THROW(fl_bin(BinOp::Div, 1.0, 0.0, p), DomainError);
  EXPECT_THROW(fl_unary(UnaryOp::Exp, 1000.0, p), DomainError);
  EXPECT_THROW(fl_unary(UnaryOp::Sqrt, -1.0, p), DomainError);
  EXPECT_EQ(fl_unary(UnaryOp::Exp, 0.0, p), 1.0);
}

TEST(Gamma, Values) {
  EXPECT_DOUBLE_EQ(gamma(10, 1e-3), 0.01 / 0.99);
  EXPECT_EQ(gamma(0, 1e-3), 0.0);
  EXPECT_THROW(gamma(1000, 1e-3), PreconditionError);
}

TEST(Arith, NativeIsPlainDouble) {
  const Arith ar;
  EXPECT_EQ(ar.add(0.1, 0.2), 0.1 + 0.2);
  EXPECT_EQ(ar.div(1.0, 3.0), 1.0 / 3.0);
  const Arith d2(PrecisionSpec::decimal(2));
  EXPECT_EQ(d2.mul(1.234, 1.0), 1.2);
}
