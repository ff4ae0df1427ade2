#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fptx/net.hpp"
#include "fptx/tensor.hpp"

namespace fptx {

enum class LayerKind {
  Centring,
  RMSNorm,
  LayerNorm,
  Affine,      // A x + b with A = weights.A1, b = weights.b1
  Perceptron,  // two-layer perceptron from weights
  SimScores,
  Softmax,
  Attention,
  MatMulPair,  // (X, Y) -> X Y
};

std::string to_string(LayerKind k);
LayerKind parse_layer_kind(const std::string& s);

// A layer together with the point at which it is linearised. Vector inputs
// are stored as single-column matrices. Matrices are vectorised column-major.
struct LayerPoint {
  LayerKind kind = LayerKind::Centring;
  Mat input;
  Mat input2;  // MatMulPair only
  BlockWeights weights;

  std::size_t input_size() const;
  Vec input_vec() const;
  LayerPoint with_input_vec(const Vec& u) const;
};

// Output in reference arithmetic; vector outputs are single columns.
Mat evaluate_exact(const LayerPoint& pt);
Vec evaluate_exact_vec(const LayerPoint& pt);

// Relative genericity threshold for piecewise-linear layers.
inline constexpr double kGenericityTol = 1e-8;

// Index set {i : (A1 x + b1)_i > 0}. Throws DegenerateInputError when some
// entry is within kGenericityTol of zero relative to its magnitude scale.
std::vector<std::size_t> relu_support(const BlockWeights& w, const Vec& x);

Mat analytic_jacobian(const LayerPoint& pt);

// Building blocks exposed for closed-form checks.
Mat jacobian_centring(std::size_t d);
Mat jacobian_rms(const Vec& x);
Mat jacobian_layer_norm(const Vec& x);
Mat jacobian_softmax(const Vec& s);
Mat jacobian_simscores(const Mat& Wq, const Mat& Wk, const Mat& X);

using VecFn = std::function<Vec(const Vec&)>;
using PatternFn = std::function<std::vector<int>(const Vec&)>;

// Central differences with step h = step_scale * (1 + ||u||_inf), refined
// once by Richardson extrapolation. If `pattern` differs between u + h e_j
// and u - h e_j a KinkCrossingError is thrown.
Mat finite_difference_jacobian(const VecFn& f, const Vec& u, double step_scale = 1e-6,
                               const PatternFn& pattern = {});
Mat finite_difference_jacobian(const LayerPoint& pt, double step_scale = 1e-6);

struct KernelReport {
  double kernel_residual = 0.0;      // ||J k||_inf for the known kernel vector k
  double spectral_norm = 0.0;        // sigma_max(J)
  double spectral_closed_form = 0.0; // NaN if there is none
};

// Defined for Centring, RMSNorm, LayerNorm and Softmax.
KernelReport jacobian_kernel_checks(const LayerPoint& pt);

}  // namespace fptx
