#include "fptx/fparith.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "fptx/error.hpp"

namespace fptx {

namespace {

constexpr int kMaxDecimalDigits = 15;

constexpr std::array<double, 23> kPow10 = {
    1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8,  1e9,  1e10, 1e11,
    1e12, 1e13, 1e14, 1e15, 1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22};

// Exact decimal rounding through the C library's correctly rounded
// conversions. Used when the fast path cannot decide a near-tie.
double round_decimal_exact(double x, int s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", s - 1, x);
  return std::strtod(buf, nullptr);
}

}  // namespace

PrecisionSpec PrecisionSpec::binary(int t) {
  if (t < 1 || t > 53) throw PreconditionError("binary precision must be in [1, 53] bits");
  return {PrecisionMode::Binary, t};
}

PrecisionSpec PrecisionSpec::decimal(int s) {
  if (s < 1 || s > kMaxDecimalDigits)
    throw PreconditionError("decimal precision must be in [1, 15] digits");
  return {PrecisionMode::Decimal, s};
}

PrecisionSpec PrecisionSpec::native() { return {PrecisionMode::Native, 53}; }

PrecisionSpec PrecisionSpec::parse(const std::string& text) {
  if (text == "native" || text == "double") return native();
  if (text.size() < 3 || text[1] != ':')
    throw PreconditionError("precision must look like d:<digits>, b:<bits> or native, got '" +
                            text + "'");
  char* end = nullptr;
  long v = std::strtol(text.c_str() + 2, &end, 10);
  if (*end != '\0') throw PreconditionError("bad precision value in '" + text + "'");
  switch (text[0]) {
    case 'd':
      return decimal(static_cast<int>(v));
    case 'b':
      return binary(static_cast<int>(v));
    default:
      throw PreconditionError("unknown precision mode in '" + text + "'");
  }
}

std::string PrecisionSpec::mode_name() const {
  switch (mode) {
    case PrecisionMode::Binary:
      return "binary";
    case PrecisionMode::Decimal:
      return "decimal";
    case PrecisionMode::Native:
      return "native";
  }
  return "native";
}

std::string PrecisionSpec::str() const {
  switch (mode) {
    case PrecisionMode::Binary:
      return "b:" + std::to_string(value);
    case PrecisionMode::Decimal:
      return "d:" + std::to_string(value);
    case PrecisionMode::Native:
      return "native";
  }
  return "native";
}

double PrecisionSpec::unit_roundoff() const {
  switch (mode) {
    case PrecisionMode::Binary:
      return std::ldexp(1.0, -value);
    case PrecisionMode::Decimal:
      return 0.5 * std::pow(10.0, 1 - value);
    case PrecisionMode::Native:
      return std::ldexp(1.0, -53);
  }
  return std::ldexp(1.0, -53);
}

double round_binary(double x, int t) {
  if (t >= 53 || x == 0.0 || !std::isfinite(x)) return x;
  const int shift = 53 - t;
  auto bits = std::bit_cast<std::uint64_t>(x);
  const std::uint64_t exp_field = (bits >> 52) & 0x7ff;
  if (exp_field == 0) {
    // Subnormal double: fall back to scaling, which is exact here.
    int e = 0;
    double m = std::frexp(x, &e);
    return std::ldexp(std::nearbyint(std::ldexp(m, t)), e - t);
  }
  const std::uint64_t lsb = (bits >> shift) & 1u;
  const std::uint64_t half = (std::uint64_t{1} << (shift - 1)) - 1u + lsb;
  bits += half;
  bits &= ~((std::uint64_t{1} << shift) - 1u);
  return std::bit_cast<double>(bits);
}

double round_decimal(double x, int s) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const double ax = std::fabs(x);
  int e2 = 0;
  std::frexp(ax, &e2);
  int e10 = static_cast<int>(std::floor((e2 - 1) * 0.30102999566398119521));
  int k = e10 - s + 1;

  auto scale = [ax](int kk, double& out) {
    if (kk > 22 || kk < -22) return false;
    out = kk < 0 ? ax * kPow10[-kk] : ax / kPow10[kk];
    return true;
  };

  double scaled = 0.0;
  if (!scale(k, scaled)) return round_decimal_exact(x, s);
  if (scaled >= kPow10[s]) {
    ++k;
    if (!scale(k, scaled)) return round_decimal_exact(x, s);
  } else if (scaled < kPow10[s - 1]) {
    --k;
    if (!scale(k, scaled)) return round_decimal_exact(x, s);
  }

  // scaled carries at most one rounding error; a near-tie needs the exact path.
  const double frac = scaled - std::floor(scaled);
  const double slack = scaled * 0x1p-50;
  if (std::fabs(frac - 0.5) <= slack) return round_decimal_exact(x, s);

  const double r = std::nearbyint(scaled);
  const double y = k < 0 ? r / kPow10[-k] : r * kPow10[k];
  return std::copysign(y, x);
}

double round_to_precision(double x, const PrecisionSpec& p) { return Arith(p).r(x); }

double fl_bin(BinOp op, double a, double b, const PrecisionSpec& p) {
  double v = 0.0;
  switch (op) {
    case BinOp::Add:
      v = a + b;
      break;
    case BinOp::Sub:
      v = a - b;
      break;
    case BinOp::Mul:
      v = a * b;
      break;
    case BinOp::Div:
      if (b == 0.0) throw DomainError("division by zero");
      v = a / b;
      break;
  }
  return round_to_precision(v, p);
}

double fl_unary(UnaryOp op, double a, const PrecisionSpec& p) {
  double v = 0.0;
  switch (op) {
    case UnaryOp::Exp:
      v = std::exp(a);
      if (!std::isfinite(v)) throw DomainError("exp overflow");
      break;
    case UnaryOp::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of a negative number");
      v = std::sqrt(a);
      break;
  }
  return round_to_precision(v, p);
}

double gamma(long n, double u) {
  if (n < 0) throw PreconditionError("gamma: n must be nonnegative");
  const double nu = static_cast<double>(n) * u;
  if (nu >= 1.0) throw PreconditionError("gamma: n*u must be below 1");
  return nu / (1.0 - nu);
}

}  // namespace fptx
