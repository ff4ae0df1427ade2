#include "fptx/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fptx/error.hpp"

namespace fptx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Arith kExact{PrecisionSpec::native()};

double ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
  return num / den;
}

Vec softmax_exact(const Vec& s) { return softmax(s, kExact, SoftmaxMode::Shifted); }

Mat B_matrix(const Mat& Wq, const Mat& Wk) {
  return scale(matmul(Wk.transpose(), Wq), 1.0 / std::sqrt(static_cast<double>(Wq.rows())));
}

// Effective affine map of the perceptron on its current linear piece.
std::pair<Mat, Vec> perceptron_piece(const BlockWeights& w, const Vec& x) {
  const auto omega = relu_support(w, x);
  Mat A(w.A2.rows(), w.A1.cols());
  Vec b = w.b2;
  for (std::size_t i = 0; i < w.A2.rows(); ++i)
    for (std::size_t k : omega) {
      const double a2 = w.A2(i, k);
      for (std::size_t j = 0; j < w.A1.cols(); ++j) A(i, j) += a2 * w.A1(k, j);
      b[i] += a2 * w.b1[k];
    }
  return {A, b};
}

// Per-entry (|A||x|)_i / |y_i| maximised, and the same numerator over ||y||_inf.
double affine_cc(const Mat& A, const Vec& x, const Vec& y) {
  const Vec num = matvec(A.abs(), abs(x));
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, ratio(num[i], std::fabs(y[i])));
  return worst;
}

double affine_mixed(const Mat& A, const Vec& x, const Vec& y) {
  return ratio(norm_inf(matvec(A.abs(), abs(x))), norm_inf(y));
}

// Numerators of the simscores bound: |x_i|^T |B x_n| + |x_i^T B| |x_n|.
Vec simscores_numerators(const Mat& B, const Mat& X) {
  const std::size_t n = X.cols();
  const Vec xn = X.col(n - 1);
  const Vec Bxn = abs(matvec(B, xn));
  const Mat XtB = matmul(X.transpose(), B).abs();
  const Vec XtBxn = matvec(XtB, abs(xn));
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = dot(abs(X.col(i)), Bxn) + XtBxn[i];
  return out;
}

// Attention bound numerators and exact output, indexed (i, t).
struct AttentionBoundTerms {
  Mat numerator;
  Mat output;
};

AttentionBoundTerms attention_bound_terms(const BlockWeights& w, const Mat& X) {
  const std::size_t d = X.rows();
  const std::size_t n = X.cols();
  const Mat B = B_matrix(w.Wq, w.Wk);
  const Mat absWv = w.Wv.abs();
  AttentionBoundTerms r{Mat(d, n), Mat(d, n)};
  for (std::size_t t = 1; t <= n; ++t) {
    const Mat Xt = X.leading_cols(t);
    const Vec psi = softmax_exact(simscores(w.Wq, w.Wk, Xt, kExact));
    const Vec y = matvec(w.Wv, matvec(Xt, psi));
    const Vec mag = matvec(absWv, matvec(Xt.abs(), psi));
    const Mat WvXt = matmul(w.Wv, Xt);
    const double coupling = norm_inf(simscores_numerators(B, Xt));
    for (std::size_t i = 0; i < d; ++i) {
      double a = 0.0;
      for (std::size_t k = 0; k < t; ++k) a += std::fabs(WvXt(i, k)) * psi[k];
      r.numerator(i, t - 1) = mag[i] + 2.0 * a * coupling;
      r.output(i, t - 1) = y[i];
    }
  }
  return r;
}

Mat residual_inner(XiWhich which, const BlockWeights& w, const Mat& X) {
  const bool ln = which == XiWhich::AttnResidualLN || which == XiWhich::MlpResidualLN;
  const NormVariant v = ln ? NormVariant::Layer : NormVariant::RMS;
  const Mat Z = normalize_columns(v, X, kExact);
  if (which == XiWhich::AttnResidualRMS || which == XiWhich::AttnResidualLN)
    return self_attention(w, Z, kExact, SoftmaxMode::Shifted);
  return perceptron_columns(w, Z, kExact);
}

}  // namespace

std::string to_string(CondKind k) {
  switch (k) {
    case CondKind::Normwise:
      return "normwise";
    case CondKind::Mixed:
      return "mixed";
    case CondKind::Componentwise:
      return "componentwise";
  }
  return "?";
}

double condition_generic(const LayerPoint& pt, CondKind kind, Norm p, Norm q) {
  const Mat J = analytic_jacobian(pt);
  const Vec u = pt.input_vec();
  const Vec f = evaluate_exact_vec(pt);
  switch (kind) {
    case CondKind::Normwise:
      return ratio(induced_norm(J, p, q) * norm(u, p), norm(f, q));
    case CondKind::Mixed:
    case CondKind::Componentwise: {
      Vec rows(J.rows(), 0.0);
      for (std::size_t i = 0; i < J.rows(); ++i)
        for (std::size_t j = 0; j < J.cols(); ++j) rows[i] += std::fabs(J(i, j) * u[j]);
      if (kind == CondKind::Mixed) return ratio(norm_inf(rows), norm_inf(f));
      double worst = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0.0) return kInf;
        worst = std::max(worst, rows[i] / std::fabs(f[i]));
      }
      return worst;
    }
  }
  return kInf;
}

double cond_cc_centring(const Vec& x) {
  const Vec c = centring(x, kExact);
  const double d = static_cast<double>(x.size());
  const double n1 = norm1(x);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, ratio(n1 + (d - 2.0) * std::fabs(x[i]), d * std::fabs(c[i])));
  return worst;
}

double cond_cc_layer_norm_bound(const Vec& x) {
  const Vec c = centring(x, kExact);
  const double cc2 = dot(c, c);
  return ratio(dot(abs(c), abs(x)), cc2) + cond_cc_centring(x);
}

double cond_cc_layer_norm_simple(const Vec& x) {
  return ratio(3.0 * norm_inf(x), min_abs(centring(x, kExact)));
}

double cond_cc_affine(const Mat& A, const Vec& x, const Vec& b) {
  return affine_cc(A, x, add(matvec(A, x), b));
}

double cond_cc_perceptron(const BlockWeights& w, const Vec& x) {
  const auto [A, b] = perceptron_piece(w, x);
  return affine_cc(A, x, perceptron(w, x, kExact));
}

std::optional<ClosedForm> condition_closed_form(const LayerPoint& pt, CondKind kind, Norm p,
                                                Norm q) {
  const bool two_two = p == Norm::Two && q == Norm::Two;
  const Vec x = pt.input.cols() == 1 ? pt.input.col(0) : Vec{};
  const double d = static_cast<double>(pt.input.rows());
  switch (pt.kind) {
    case LayerKind::Centring: {
      const Vec c = centring(x, kExact);
      if (kind == CondKind::Normwise)
        return two_two ? std::optional<ClosedForm>({ratio(norm2(x), norm2(c)), true}) : std::nullopt;
      if (kind == CondKind::Mixed)
        return ClosedForm{ratio(norm1(x) + (d - 2.0) * norm_inf(x), d * norm_inf(c)), true};
      if (min_abs(c) == 0.0) return ClosedForm{kInf, true};
      return ClosedForm{cond_cc_centring(x), true};
    }
    case LayerKind::RMSNorm: {
      const double n2 = dot(x, x);
      if (kind == CondKind::Normwise)
        return two_two ? std::optional<ClosedForm>({1.0, true}) : std::nullopt;
      if (kind == CondKind::Mixed) {
        double worst = 0.0;
        for (double xi : x) worst = std::max(worst, std::fabs(xi) * (1.0 - xi * xi / n2));
        return ClosedForm{2.0 * worst / norm_inf(x), true};
      }
      const double m = min_abs(x);
      if (m == 0.0) return ClosedForm{kInf, true};
      return ClosedForm{2.0 * (1.0 - m * m / n2), true};
    }
    case LayerKind::LayerNorm: {
      const Vec c = centring(x, kExact);
      if (kind == CondKind::Normwise)
        return two_two ? std::optional<ClosedForm>({ratio(norm2(x), norm2(c)), true}) : std::nullopt;
      if (kind == CondKind::Mixed)
        return ClosedForm{ratio(dot(abs(c), abs(x)), dot(c, c)) +
                              ratio(norm1(x) + (d - 2.0) * norm_inf(x), d * norm_inf(c)),
                          false};
      if (min_abs(c) == 0.0) return ClosedForm{kInf, true};
      return ClosedForm{cond_cc_layer_norm_bound(x), false};
    }
    case LayerKind::Affine: {
      const Mat& A = pt.weights.A1;
      const Vec y = add(matvec(A, x), pt.weights.b1);
      if (kind == CondKind::Normwise)
        return ClosedForm{ratio(induced_norm(A, p, q) * norm(x, p), norm(y, q)), true};
      if (kind == CondKind::Mixed) return ClosedForm{affine_mixed(A, x, y), true};
      return ClosedForm{affine_cc(A, x, y), true};
    }
    case LayerKind::Perceptron: {
      const auto [A, b] = perceptron_piece(pt.weights, x);
      const Vec y = add(matvec(A, x), b);
      if (kind == CondKind::Normwise)
        return ClosedForm{ratio(induced_norm(A, p, q) * norm(x, p), norm(y, q)), true};
      if (kind == CondKind::Mixed) return ClosedForm{affine_mixed(A, x, y), true};
      return ClosedForm{affine_cc(A, x, y), true};
    }
    case LayerKind::SimScores: {
      if (kind == CondKind::Normwise) return std::nullopt;
      const Mat B = B_matrix(pt.weights.Wq, pt.weights.Wk);
      const Vec num = simscores_numerators(B, pt.input);
      const Vec s = simscores(pt.weights.Wq, pt.weights.Wk, pt.input, kExact);
      if (kind == CondKind::Mixed) return ClosedForm{ratio(norm_inf(num), norm_inf(s)), false};
      double worst = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == 0.0) return ClosedForm{kInf, false};
        worst = std::max(worst, num[i] / std::fabs(s[i]));
      }
      return ClosedForm{worst, false};
    }
    case LayerKind::Softmax: {
      if (kind == CondKind::Normwise) return std::nullopt;
      const Vec psi = softmax_exact(x);
      const double mean_abs = dot(psi, abs(x));
      double worst = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double row = std::fabs(x[i]) * (1.0 - 2.0 * psi[i]) + mean_abs;
        worst = std::max(worst, kind == CondKind::Mixed ? psi[i] * row : row);
      }
      if (kind == CondKind::Mixed) worst /= norm_inf(psi);
      return ClosedForm{worst, true};
    }
    case LayerKind::Attention: {
      if (kind == CondKind::Normwise) return std::nullopt;
      const auto terms = attention_bound_terms(pt.weights, pt.input);
      if (kind == CondKind::Mixed)
        return ClosedForm{ratio(max_abs(terms.numerator), max_abs(terms.output)), false};
      double worst = 0.0;
      for (std::size_t k = 0; k < terms.output.size(); ++k) {
        if (terms.output.data()[k] == 0.0) return ClosedForm{kInf, false};
        worst = std::max(worst, terms.numerator.data()[k] / std::fabs(terms.output.data()[k]));
      }
      return ClosedForm{worst, false};
    }
    case LayerKind::MatMulPair:
      return std::nullopt;
  }
  return std::nullopt;
}

double xi_factor(XiWhich which, const BlockWeights& w, const Mat& X) {
  switch (which) {
    case XiWhich::Perceptron: {
      if (X.cols() != 1) throw PreconditionError("xi_factor(M): expects a single column");
      const Vec x = X.col(0);
      const Vec z = add(matvec(w.A1, x), w.b1);
      const Vec inner = add(matvec(w.A1.abs(), abs(x)), abs(w.b1));
      const Vec y = perceptron(w, x, kExact);
      double worst = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        double num = std::fabs(w.b2[i]);
        for (std::size_t k = 0; k < z.size(); ++k)
          if (z[k] > 0.0) num += std::fabs(w.A2(i, k)) * inner[k];
        worst = std::max(worst, ratio(num, std::fabs(y[i])));
      }
      return worst;
    }
    case XiWhich::SimScores: {
      const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(X.rows()));
      const Vec qmag = matvec(w.Wq.abs(), abs(X.col(X.cols() - 1)));
      const Vec s = simscores(w.Wq, w.Wk, X, kExact);
      const Mat absWk = w.Wk.abs();
      double worst = 0.0;
      for (std::size_t i = 0; i < X.cols(); ++i) {
        const double num = inv_sqrt_d * dot(matvec(absWk, abs(X.col(i))), qmag);
        worst = std::max(worst, ratio(num, std::fabs(s[i])));
      }
      return worst;
    }
    case XiWhich::Attention: {
      const Mat absWv = w.Wv.abs();
      double worst = 0.0;
      for (std::size_t t = 1; t <= X.cols(); ++t) {
        const Mat Xt = X.leading_cols(t);
        const Vec psi = softmax_exact(simscores(w.Wq, w.Wk, Xt, kExact));
        const Vec num = matvec(absWv, matvec(Xt.abs(), psi));
        const Vec y = matvec(w.Wv, matvec(Xt, psi));
        for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, ratio(num[i], std::fabs(y[i])));
      }
      return worst;
    }
    case XiWhich::AttnResidualRMS:
    case XiWhich::AttnResidualLN:
    case XiWhich::MlpResidualRMS:
    case XiWhich::MlpResidualLN: {
      if ((which == XiWhich::MlpResidualRMS || which == XiWhich::MlpResidualLN) && X.cols() != 1)
        throw PreconditionError("xi_factor(f_M): expects a single column");
      const Mat inner = residual_inner(which, w, X);
      double worst = 0.0;
      for (std::size_t k = 0; k < X.size(); ++k) {
        const double a = X.data()[k];
        const double b = inner.data()[k];
        worst = std::max(worst, ratio(std::fabs(a) + std::fabs(b), std::fabs(a + b)));
      }
      return worst;
    }
  }
  return kInf;
}

SpectralData spectral_data(const Mat& Wq, const Mat& Wk) {
  SpectralData s;
  s.sigma_abs = sv_extremes(matmul(Wk.abs().transpose(), Wq.abs())).sigma_max;
  const auto ext = sv_extremes(matmul(Wk.transpose(), Wq));
  s.sigma_max = ext.sigma_max;
  s.sigma_min = ext.sigma_min;
  if (s.sigma_max == 0.0 || s.sigma_min <= kSingularityTol * s.sigma_max)
    throw SingularityError("W_k^T W_q is numerically singular");
  return s;
}

double xi_simscores_spectral_bound(const Mat& Wq, const Mat& Wk) {
  const auto s = spectral_data(Wq, Wk);
  return s.sigma_abs / s.sigma_min;
}

double attention_cond_bound(const BlockWeights& w, const Mat& X, bool normalized) {
  const double d = static_cast<double>(X.rows());
  const double normB = sv_extremes(matmul(w.Wk.transpose(), w.Wq)).sigma_max / std::sqrt(d);
  double col2 = 0.0;
  if (normalized) {
    col2 = d;
  } else {
    for (std::size_t t = 0; t < X.cols(); ++t) {
      const double c = norm2(X.col(t));
      col2 = std::max(col2, c * c);
    }
  }
  return xi_factor(XiWhich::Attention, w, X) * (1.0 + 4.0 * normB * col2);
}

}  // namespace fptx
