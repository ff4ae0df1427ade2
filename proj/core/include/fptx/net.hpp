#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fptx/fparith.hpp"
#include "fptx/tensor.hpp"

namespace fptx {

enum class NormVariant { RMS, Layer };
enum class Placement { PreAttention, PostAttention };
enum class SoftmaxMode { Unshifted, Shifted };

std::string to_string(NormVariant v);
std::string to_string(Placement p);
NormVariant parse_variant(const std::string& s);
Placement parse_placement(const std::string& s);
SoftmaxMode parse_softmax_mode(const std::string& s);

// Weights of one transformer block. The key dimension equals d.
struct BlockWeights {
  Mat Wq, Wk, Wv;  // d x d
  Mat A1;          // D x d
  Vec b1;          // D
  Mat A2;          // d x D
  Vec b2;          // d
};

struct TransformerConfig {
  std::size_t d = 0;
  std::size_t D = 0;
  NormVariant variant = NormVariant::RMS;
  Placement placement = Placement::PreAttention;
  SoftmaxMode softmax = SoftmaxMode::Unshifted;
  std::vector<BlockWeights> layers;

  std::size_t depth() const { return layers.size(); }
  // Throws PreconditionError on any shape mismatch.
  void validate() const;
};

// Scores with |s| above this overflow exp in double.
inline constexpr double kSoftmaxScoreLimit = 700.0;

// Every elementary operation below is rounded under `ar`. Sums accumulate
// left to right; inner products round each product and each partial sum.

double fl_sum(const Vec& x, const Arith& ar);
double fl_dot(const Vec& a, const Vec& b, const Arith& ar);
Vec fl_matvec(const Mat& A, const Vec& x, const Arith& ar);
// A x + b with the bias added after the inner product.
Vec fl_affine(const Mat& A, const Vec& x, const Vec& b, const Arith& ar);
Mat fl_add(const Mat& a, const Mat& b, const Arith& ar);

Vec centring(const Vec& x, const Arith& ar);
Vec layer_norm(const Vec& x, const Arith& ar);
Vec rms_norm(const Vec& x, const Arith& ar);
Vec normalize(NormVariant v, const Vec& x, const Arith& ar);
// Column-wise normalisation (the starred operator).
Mat normalize_columns(NormVariant v, const Mat& X, const Arith& ar);

Vec relu(const Vec& x);
// Two-layer perceptron A2 relu(A1 x + b1) + b2.
Vec perceptron(const BlockWeights& w, const Vec& x, const Arith& ar);
Mat perceptron_columns(const BlockWeights& w, const Mat& X, const Arith& ar);

// (1/sqrt d) (Wk X)^T (Wq x_n), x_n the last column of X.
Vec simscores(const Mat& Wq, const Mat& Wk, const Mat& X, const Arith& ar);
Vec softmax(const Vec& s, const Arith& ar, SoftmaxMode mode = SoftmaxMode::Unshifted);
// Causal self-attention; column t is Wv (X_t psi(S(X_t))).
Mat self_attention(const BlockWeights& w, const Mat& X, const Arith& ar,
                   SoftmaxMode mode = SoftmaxMode::Unshifted);

// Residual sub-blocks. Pre-attention: X + A(norm*(X)); post-attention:
// X + norm*(A(X)).
Mat attention_sublayer(const TransformerConfig& cfg, std::size_t layer, const Mat& X,
                       const Arith& ar);
// Y + M*(norm*(Y)).
Mat perceptron_sublayer(const TransformerConfig& cfg, std::size_t layer, const Mat& Y,
                        const Arith& ar);

Mat transformer_block(const TransformerConfig& cfg, std::size_t layer, const Mat& X,
                      const Arith& ar);

// Returns X^(0), ..., X^(L).
std::vector<Mat> deep_transformer(const TransformerConfig& cfg, const Mat& X, const Arith& ar);

// Round data to a precision so that it is exactly representable there.
Vec quantize(const Vec& v, const PrecisionSpec& p);
Mat quantize(const Mat& m, const PrecisionSpec& p);
BlockWeights quantize(const BlockWeights& w, const PrecisionSpec& p);
TransformerConfig quantize(const TransformerConfig& cfg, const PrecisionSpec& p);

}  // namespace fptx
