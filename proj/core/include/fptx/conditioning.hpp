#pragma once

#include <optional>
#include <string>

#include "fptx/jacobians.hpp"

namespace fptx {

enum class CondKind { Normwise, Mixed, Componentwise };

std::string to_string(CondKind k);

// Condition number from the analytic Jacobian. Normwise uses the (p, q)
// induced norm on vectorised input/output. Componentwise is +inf when the
// output has a zero entry.
double condition_generic(const LayerPoint& pt, CondKind kind, Norm p = Norm::Two,
                         Norm q = Norm::Two);

struct ClosedForm {
  double value = 0.0;
  bool exact = true;  // false: the value is an upper bound
};

// Closed-form value where one is known, nullopt otherwise.
std::optional<ClosedForm> condition_closed_form(const LayerPoint& pt, CondKind kind,
                                                Norm p = Norm::Two, Norm q = Norm::Two);

// Componentwise condition numbers used by error bounds.
double cond_cc_centring(const Vec& x);
double cond_cc_layer_norm_bound(const Vec& x);   // two-term bound
double cond_cc_layer_norm_simple(const Vec& x);  // 3 ||x||_inf / ||c x||_{-inf}
double cond_cc_affine(const Mat& A, const Vec& x, const Vec& b);
double cond_cc_perceptron(const BlockWeights& w, const Vec& x);

enum class XiWhich {
  Perceptron,     // xi(M, x)
  SimScores,      // xi(S, X)
  Attention,      // xi(A, X)
  AttnResidualRMS,  // xi(f_A, X)
  AttnResidualLN,   // xi(g_A, X)
  MlpResidualRMS,   // xi(f_M, x), single column
  MlpResidualLN,    // xi(g_M, x), single column
};

// Ratios of magnitude sums to magnitudes, with 0/0 = 0 and a/0 = inf.
double xi_factor(XiWhich which, const BlockWeights& w, const Mat& X);

// Singular-value threshold below which W_k^T W_q counts as singular.
inline constexpr double kSingularityTol = 1e-12;

struct SpectralData {
  double sigma_abs = 0.0;  // sigma_max(|W_k|^T |W_q|)
  double sigma_max = 0.0;  // of W_k^T W_q
  double sigma_min = 0.0;
};

// Throws SingularityError if sigma_min <= kSingularityTol * sigma_max.
SpectralData spectral_data(const Mat& Wq, const Mat& Wk);

// sigma_max(|W_k|^T |W_q|) / sigma_min(W_k^T W_q).
double xi_simscores_spectral_bound(const Mat& Wq, const Mat& Wk);

// xi(A, X) [1 + 4 ||B||_2 max_t ||x_t||_2^2]; with `normalized` the column
// norms are taken to be sqrt(d).
double attention_cond_bound(const BlockWeights& w, const Mat& X, bool normalized = false);

}  // namespace fptx
