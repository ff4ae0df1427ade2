#pragma once

#include <cstdint>
#include <string>

namespace fptx {

enum class PrecisionMode { Binary, Decimal, Native };

// A simulated floating-point format. Binary(t): t-bit significand.
// Decimal(s): s significant decimal digits. Native: IEEE double, no extra
// rounding. The exponent range is unbounded in the simulated formats.
struct PrecisionSpec {
  PrecisionMode mode = PrecisionMode::Native;
  int value = 53;

  static PrecisionSpec binary(int t);
  static PrecisionSpec decimal(int s);
  static PrecisionSpec native();

  // "b:<bits>", "d:<digits>" or "native".
  static PrecisionSpec parse(const std::string& text);
  std::string str() const;
  std::string mode_name() const;

  double unit_roundoff() const;

  friend bool operator==(const PrecisionSpec&, const PrecisionSpec&) = default;
};

enum class BinOp { Add, Sub, Mul, Div };
enum class UnaryOp { Exp, Sqrt };

// Round-to-nearest, ties-to-even.
double round_to_precision(double x, const PrecisionSpec& p);
double round_binary(double x, int t);
double round_decimal(double x, int s);

double fl_bin(BinOp op, double a, double b, const PrecisionSpec& p);
double fl_unary(UnaryOp op, double a, const PrecisionSpec& p);

// gamma_n = n u / (1 - n u); throws PreconditionError unless n u < 1.
double gamma(long n, double u);

// Bundles a precision with the elementary operations so that layer code reads
// like ordinary arithmetic.
class Arith {
 public:
  explicit Arith(PrecisionSpec p = PrecisionSpec::native()) : p_(p) {}

  const PrecisionSpec& spec() const { return p_; }
  double u() const { return p_.unit_roundoff(); }

  double r(double x) const {
    switch (p_.mode) {
      case PrecisionMode::Native:
        return x;
      case PrecisionMode::Binary:
        return round_binary(x, p_.value);
      case PrecisionMode::Decimal:
        return round_decimal(x, p_.value);
    }
    return x;
  }
  double add(double a, double b) const { return r(a + b); }
  double sub(double a, double b) const { return r(a - b); }
  double mul(double a, double b) const { return r(a * b); }
  double div(double a, double b) const { return fl_bin(BinOp::Div, a, b, p_); }
  double exp(double a) const { return fl_unary(UnaryOp::Exp, a, p_); }
  double sqrt(double a) const { return fl_unary(UnaryOp::Sqrt, a, p_); }

 private:
  PrecisionSpec p_;
};

}  // namespace fptx
