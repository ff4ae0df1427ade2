#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fptx/conditioning.hpp"
#include "fptx/net.hpp"

namespace fptx {

// Measured errors may exceed a first-order bound by at most this factor.
inline constexpr double kDominationSlack = 1.1;
// Strengthening factor used in perturbed-input hypotheses.
inline constexpr double kAlpha = 2.0;
// rho_in * kappa_cc must stay below this for the perturbed bounds.
inline constexpr double kBetaSurrogate = 0.5;

struct HypothesisCheck {
  std::string name;
  bool holds = true;
  std::string detail;
};

struct BoundResult {
  double first_order_bound = 0.0;
  std::vector<HypothesisCheck> hypotheses;
  std::map<std::string, double> ingredients;

  bool hypotheses_hold() const;
};

struct SumMatvecBound {
  double summation = 0.0;  // gamma_{d-1}
  double matvec = 0.0;     // gamma_d
  double affine_A = 0.0;   // u + (1 + u) gamma_d, multiplies |A||x|
  double affine_b = 0.0;   // u, multiplies |b|
};

SumMatvecBound bound_summation_matvec(std::size_t d, double u);

// Componentwise first-order bound for a layer on exact input.
BoundResult bound_layer_fresh(const LayerPoint& pt, double u);

// Same with an input perturbed by rho_in (componentwise).
BoundResult bound_layer_perturbed(const LayerPoint& pt, double u, double rho_in);

// Residual sub-blocks of a pre-attention block (variant taken from cfg).
BoundResult bound_attention_sublayer(const TransformerConfig& cfg, std::size_t layer, const Mat& X,
                                     double u, double rho_in = 0.0);
BoundResult bound_perceptron_sublayer(const TransformerConfig& cfg, std::size_t layer,
                                      const Mat& Y, double u, double rho_in = 0.0);

// One pre-attention block. Throws SingularityError if W_k^T W_q is singular
// and CapabilityError for post-attention placement.
BoundResult bound_block(const TransformerConfig& cfg, std::size_t layer, const Mat& X, double u,
                        double rho_in = 0.0);

// Whole stack with exact input X^(0).
BoundResult bound_deep(const TransformerConfig& cfg, const Mat& X0, double u);

// Deep bound for every prefix depth 1..L in one pass. Entry l - 1 refers to
// the first l blocks; hypotheses_hold[l - 1] covers those blocks only.
struct DeepBoundProfile {
  std::vector<double> bound;
  std::vector<bool> hypotheses_hold;
};
DeepBoundProfile bound_deep_profile(const TransformerConfig& cfg, const Mat& X0, double u);

struct ErrorMeasurement {
  double componentwise = 0.0;
  double normwise = 0.0;  // max over columns of the l2 relative error
};

using Evaluator = std::function<Mat(const Mat&, const Arith&)>;

// Runs `f` under both precisions on the same input and compares.
ErrorMeasurement measure_error(const Evaluator& f, const Mat& input, const PrecisionSpec& low,
                               const PrecisionSpec& ref = PrecisionSpec::native());
ErrorMeasurement compare(const Mat& low, const Mat& ref);

// Evaluator for a single layer under a given arithmetic.
Mat evaluate_layer(const LayerPoint& pt, const Mat& input, const Arith& ar);

}  // namespace fptx
