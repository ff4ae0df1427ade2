#include "fptx/jacobians.hpp"

#include <cmath>
#include <limits>

#include "fptx/error.hpp"

namespace fptx {

namespace {

// Reference evaluations below use the shifted softmax: same function, no overflow.
const Arith kExact{PrecisionSpec::native()};

Mat mat_B(const Mat& Wq, const Mat& Wk) {
  return scale(matmul(Wk.transpose(), Wq), 1.0 / std::sqrt(static_cast<double>(Wq.rows())));
}

void place(Mat& dst, const Mat& src, std::size_t r0, std::size_t c0) {
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) dst(r0 + i, c0 + j) += src(i, j);
}

std::vector<int> relu_pattern(const BlockWeights& w, const Vec& x) {
  const Vec z = add(matvec(w.A1, x), w.b1);
  std::vector<int> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = z[i] > 0.0 ? 1 : 0;
  return p;
}

}  // namespace

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Centring:
      return "centring";
    case LayerKind::RMSNorm:
      return "rms";
    case LayerKind::LayerNorm:
      return "ln";
    case LayerKind::Affine:
      return "affine";
    case LayerKind::Perceptron:
      return "tlp";
    case LayerKind::SimScores:
      return "simscores";
    case LayerKind::Softmax:
      return "softmax";
    case LayerKind::Attention:
      return "attention";
    case LayerKind::MatMulPair:
      return "matmul";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
  for (auto k : {LayerKind::Centring, LayerKind::RMSNorm, LayerKind::LayerNorm, LayerKind::Affine,
                 LayerKind::Perceptron, LayerKind::SimScores, LayerKind::Softmax,
                 LayerKind::Attention, LayerKind::MatMulPair})
    if (to_string(k) == s) return k;
  throw PreconditionError("unknown layer kind '" + s + "'");
}

std::size_t LayerPoint::input_size() const { return input.size() + input2.size(); }

Vec LayerPoint::input_vec() const {
  Vec u = vec(input);
  if (kind == LayerKind::MatMulPair) {
    const Vec v = vec(input2);
    u.insert(u.end(), v.begin(), v.end());
  }
  return u;
}

LayerPoint LayerPoint::with_input_vec(const Vec& u) const {
  if (u.size() != input_size()) throw PreconditionError("with_input_vec: size mismatch");
  LayerPoint p = *this;
  const Vec first(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(input.size()));
  p.input = unvec(first, input.rows(), input.cols());
  if (kind == LayerKind::MatMulPair) {
    const Vec second(u.begin() + static_cast<std::ptrdiff_t>(input.size()), u.end());
    p.input2 = unvec(second, input2.rows(), input2.cols());
  }
  return p;
}

Mat evaluate_exact(const LayerPoint& pt) {
  const Vec x = pt.input.cols() == 1 ? pt.input.col(0) : Vec{};
  switch (pt.kind) {
    case LayerKind::Centring:
      return Mat::column(centring(x, kExact));
    case LayerKind::RMSNorm:
      return Mat::column(rms_norm(x, kExact));
    case LayerKind::LayerNorm:
      return Mat::column(layer_norm(x, kExact));
    case LayerKind::Affine:
      return Mat::column(fl_affine(pt.weights.A1, x, pt.weights.b1, kExact));
    case LayerKind::Perceptron:
      return Mat::column(perceptron(pt.weights, x, kExact));
    case LayerKind::SimScores:
      return Mat::column(simscores(pt.weights.Wq, pt.weights.Wk, pt.input, kExact));
    case LayerKind::Softmax:
      return Mat::column(softmax(x, kExact, SoftmaxMode::Shifted));
    case LayerKind::Attention:
      return self_attention(pt.weights, pt.input, kExact, SoftmaxMode::Shifted);
    case LayerKind::MatMulPair:
      return matmul(pt.input, pt.input2);
  }
  throw PreconditionError("evaluate_exact: unknown kind");
}

Vec evaluate_exact_vec(const LayerPoint& pt) { return vec(evaluate_exact(pt)); }

std::vector<std::size_t> relu_support(const BlockWeights& w, const Vec& x) {
  const Vec z = add(matvec(w.A1, x), w.b1);
  const Vec scale_v = add(matvec(w.A1.abs(), abs(x)), abs(w.b1));
  std::vector<std::size_t> omega;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::fabs(z[i]) <= kGenericityTol * scale_v[i])
      throw DegenerateInputError("perceptron: pre-activation is numerically zero; Jacobian undefined");
    if (z[i] > 0.0) omega.push_back(i);
  }
  return omega;
}

Mat jacobian_centring(std::size_t d) {
  Mat J = Mat::identity(d);
  for (auto& v : J.data()) v -= 1.0 / static_cast<double>(d);
  return J;
}

Mat jacobian_rms(const Vec& x) {
  const double nrm = norm2(x);
  if (nrm == 0.0) throw DegenerateInputError("jacobian_rms: zero input");
  const std::size_t d = x.size();
  const double c = std::sqrt(static_cast<double>(d)) / nrm;
  Mat J(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      J(i, j) = c * ((i == j ? 1.0 : 0.0) - (x[i] / nrm) * (x[j] / nrm));
  return J;
}

Mat jacobian_layer_norm(const Vec& x) {
  const Vec c = centring(x, kExact);
  if (norm_inf(c) == 0.0) throw DegenerateInputError("jacobian_layer_norm: constant input");
  return matmul(jacobian_rms(c), jacobian_centring(x.size()));
}

Mat jacobian_softmax(const Vec& s) {
  const Vec p = softmax(s, kExact, SoftmaxMode::Shifted);
  Mat J(p.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) J(i, j) = (i == j ? p[i] : 0.0) - p[i] * p[j];
  return J;
}

Mat jacobian_simscores(const Mat& Wq, const Mat& Wk, const Mat& X) {
  const std::size_t d = X.rows();
  const std::size_t n = X.cols();
  const Mat B = mat_B(Wq, Wk);
  const Vec xn = X.col(n - 1);
  const Vec Bxn = matvec(B, xn);  // row i block (i, i) is x_n^T B^T = (B x_n)^T
  const Mat XtB = matmul(X.transpose(), B);
  Mat J(n, d * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) J(i, i * d + k) += Bxn[k];
    for (std::size_t k = 0; k < d; ++k) J(i, (n - 1) * d + k) += XtB(i, k);
  }
  return J;
}

Mat analytic_jacobian(const LayerPoint& pt) {
  const Vec x = pt.input.cols() == 1 ? pt.input.col(0) : Vec{};
  switch (pt.kind) {
    case LayerKind::Centring:
      return jacobian_centring(pt.input.rows());
    case LayerKind::RMSNorm:
      return jacobian_rms(x);
    case LayerKind::LayerNorm:
      return jacobian_layer_norm(x);
    case LayerKind::Affine:
      return pt.weights.A1;
    case LayerKind::Perceptron: {
      const auto omega = relu_support(pt.weights, x);
      const Mat& A1 = pt.weights.A1;
      const Mat& A2 = pt.weights.A2;
      Mat J(A2.rows(), A1.cols());
      for (std::size_t i = 0; i < A2.rows(); ++i)
        for (std::size_t k : omega)
          for (std::size_t j = 0; j < A1.cols(); ++j) J(i, j) += A2(i, k) * A1(k, j);
      return J;
    }
    case LayerKind::SimScores:
      return jacobian_simscores(pt.weights.Wq, pt.weights.Wk, pt.input);
    case LayerKind::Softmax:
      return jacobian_softmax(x);
    case LayerKind::Attention: {
      const Mat& X = pt.input;
      const Mat& Wv = pt.weights.Wv;
      const std::size_t d = X.rows();
      const std::size_t n = X.cols();
      Mat J(d * n, d * n);
      for (std::size_t t = 1; t <= n; ++t) {
        const Mat Xt = X.leading_cols(t);
        const Vec s = simscores(pt.weights.Wq, pt.weights.Wk, Xt, kExact);
        const Vec psi = softmax(s, kExact, SoftmaxMode::Shifted);
        Mat psi_row(1, t);
        for (std::size_t i = 0; i < t; ++i) psi_row(0, i) = psi[i];
        Mat H = kron(psi_row, Wv);
        const Mat chain = matmul(matmul(matmul(Wv, Xt), jacobian_softmax(s)),
                                 jacobian_simscores(pt.weights.Wq, pt.weights.Wk, Xt));
        place(J, H, (t - 1) * d, 0);
        place(J, chain, (t - 1) * d, 0);
      }
      return J;
    }
    case LayerKind::MatMulPair: {
      const Mat& X = pt.input;
      const Mat& Y = pt.input2;
      const std::size_t m = X.rows();
      const std::size_t n = Y.cols();
      Mat J(m * n, X.size() + Y.size());
      place(J, kron(Y.transpose(), Mat::identity(m)), 0, 0);
      place(J, kron(Mat::identity(n), X), 0, X.size());
      return J;
    }
  }
  throw PreconditionError("analytic_jacobian: unknown kind");
}

Mat finite_difference_jacobian(const VecFn& f, const Vec& u, double step_scale,
                               const PatternFn& pattern) {
  const double h = step_scale * (1.0 + norm_inf(u));
  const Vec f0 = f(u);
  Mat J(f0.size(), u.size());
  Vec up = u;
  auto central = [&](std::size_t j, double step) {
    up[j] = u[j] + step;
    const Vec fp = f(up);
    std::vector<int> pp;
    if (pattern) pp = pattern(up);
    up[j] = u[j] - step;
    const Vec fm = f(up);
    if (pattern && pattern(up) != pp)
      throw KinkCrossingError("finite differences straddle a kink; use a smaller step");
    up[j] = u[j];
    Vec dcol(fp.size());
    for (std::size_t i = 0; i < fp.size(); ++i) dcol[i] = (fp[i] - fm[i]) / (2.0 * step);
    return dcol;
  };
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec coarse = central(j, h);
    const Vec fine = central(j, 0.5 * h);
    for (std::size_t i = 0; i < f0.size(); ++i) J(i, j) = (4.0 * fine[i] - coarse[i]) / 3.0;
  }
  return J;
}

Mat finite_difference_jacobian(const LayerPoint& pt, double step_scale) {
  VecFn f = [&pt](const Vec& u) { return evaluate_exact_vec(pt.with_input_vec(u)); };
  PatternFn pattern;
  if (pt.kind == LayerKind::Perceptron)
    pattern = [&pt](const Vec& u) { return relu_pattern(pt.weights, u); };
  return finite_difference_jacobian(f, pt.input_vec(), step_scale, pattern);
}

KernelReport jacobian_kernel_checks(const LayerPoint& pt) {
  const Vec x = pt.input.col(0);
  const std::size_t d = x.size();
  const Vec e(d, 1.0);
  const Mat J = analytic_jacobian(pt);
  KernelReport r;
  r.spectral_norm = sv_extremes(J).sigma_max;
  r.spectral_closed_form = std::numeric_limits<double>::quiet_NaN();
  switch (pt.kind) {
    case LayerKind::Centring:
      r.kernel_residual = norm_inf(matvec(J, e));
      r.spectral_closed_form = 1.0;
      break;
    case LayerKind::RMSNorm:
      r.kernel_residual = norm_inf(matvec(J, x));
      r.spectral_closed_form = std::sqrt(static_cast<double>(d)) / norm2(x);
      break;
    case LayerKind::LayerNorm:
      r.kernel_residual = norm_inf(matvec(J, e));
      // For d = 2 the centred vector spans the image of J_c and J_N vanishes.
      r.spectral_closed_form = d < 3 ? 0.0 : std::sqrt(static_cast<double>(d)) / norm2(centring(x, kExact));
      break;
    case LayerKind::Softmax:
      r.kernel_residual = norm_inf(matvec(J, e));
      break;
    default:
      throw CapabilityError("jacobian_kernel_checks: no known kernel for this layer kind");
  }
  return r;
}

}  // namespace fptx
