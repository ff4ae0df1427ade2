#include "fptx/net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fptx/error.hpp"

namespace fptx {

std::string to_string(NormVariant v) { return v == NormVariant::RMS ? "rms" : "ln"; }

std::string to_string(Placement p) { return p == Placement::PreAttention ? "pre" : "post"; }

NormVariant parse_variant(const std::string& s) {
  if (s == "rms") return NormVariant::RMS;
  if (s == "ln" || s == "layer") return NormVariant::Layer;
  throw PreconditionError("unknown normalisation variant '" + s + "' (expected rms or ln)");
}

Placement parse_placement(const std::string& s) {
  if (s == "pre") return Placement::PreAttention;
  if (s == "post") return Placement::PostAttention;
  throw PreconditionError("unknown placement '" + s + "' (expected pre or post)");
}

SoftmaxMode parse_softmax_mode(const std::string& s) {
  if (s == "unshifted") return SoftmaxMode::Unshifted;
  if (s == "shifted") return SoftmaxMode::Shifted;
  throw PreconditionError("unknown softmax mode '" + s + "' (expected unshifted or shifted)");
}

void TransformerConfig::validate() const {
  if (d == 0 || D == 0) throw PreconditionError("TransformerConfig: d and D must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l];
    auto square = [&](const Mat& m, const char* name) {
      if (m.rows() != d || m.cols() != d)
        throw PreconditionError(std::string("TransformerConfig: ") + name + " must be d x d in layer " +
                                std::to_string(l));
    };
    square(w.Wq, "Wq");
    square(w.Wk, "Wk");
    square(w.Wv, "Wv");
    if (w.A1.rows() != D || w.A1.cols() != d || w.b1.size() != D || w.A2.rows() != d ||
        w.A2.cols() != D || w.b2.size() != d)
      throw PreconditionError("TransformerConfig: perceptron shapes inconsistent in layer " +
                              std::to_string(l));
  }
}

double fl_sum(const Vec& x, const Arith& ar) {
  if (x.empty()) return 0.0;
  double s = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) s = ar.add(s, x[i]);
  return s;
}

double fl_dot(const Vec& a, const Vec& b, const Arith& ar) {
  if (a.size() != b.size()) throw PreconditionError("fl_dot: length mismatch");
  if (a.empty()) return 0.0;
  double s = ar.mul(a[0], b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) s = ar.add(s, ar.mul(a[i], b[i]));
  return s;
}

Vec fl_matvec(const Mat& A, const Vec& x, const Arith& ar) {
  if (A.cols() != x.size()) throw PreconditionError("fl_matvec: dimension mismatch");
  Vec y(A.rows());
  const std::size_t n = A.cols();
  const double* a = A.data().data();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* row = a + i * n;
    double s = ar.mul(row[0], x[0]);
    for (std::size_t j = 1; j < n; ++j) s = ar.add(s, ar.mul(row[j], x[j]));
    y[i] = s;
  }
  return y;
}

Vec fl_affine(const Mat& A, const Vec& x, const Vec& b, const Arith& ar) {
  if (b.size() != A.rows()) throw PreconditionError("fl_affine: bias length mismatch");
  Vec y = fl_matvec(A, x, ar);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ar.add(y[i], b[i]);
  return y;
}

Mat fl_add(const Mat& a, const Mat& b, const Arith& ar) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw PreconditionError("fl_add: shape mismatch");
  Mat c(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = ar.add(a.data()[i], b.data()[i]);
  return c;
}

Vec centring(const Vec& x, const Arith& ar) {
  if (x.empty()) throw PreconditionError("centring: empty input");
  const double mean = ar.div(fl_sum(x, ar), static_cast<double>(x.size()));
  Vec c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = ar.sub(x[i], mean);
  return c;
}

namespace {

double fl_sum_squares(const Vec& x, const Arith& ar) {
  double s = ar.mul(x[0], x[0]);
  for (std::size_t i = 1; i < x.size(); ++i) s = ar.add(s, ar.mul(x[i], x[i]));
  return s;
}

}  // namespace

Vec layer_norm(const Vec& x, const Arith& ar) {
  const Vec c = centring(x, ar);
  const double ss = fl_sum_squares(c, ar);
  if (ss == 0.0) throw DegenerateInputError("layer_norm: input is constant");
  const double sd = ar.sqrt(ar.div(ss, static_cast<double>(x.size())));
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = ar.div(c[i], sd);
  return y;
}

Vec rms_norm(const Vec& x, const Arith& ar) {
  if (x.empty()) throw PreconditionError("rms_norm: empty input");
  const double ss = fl_sum_squares(x, ar);
  if (ss == 0.0) throw DegenerateInputError("rms_norm: input is zero");
  const double nrm = ar.sqrt(ss);
  // sqrt(d) is a constant held in reference precision.
  const double sqrt_d = std::sqrt(static_cast<double>(x.size()));
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = ar.div(ar.mul(sqrt_d, x[i]), nrm);
  return y;
}

Vec normalize(NormVariant v, const Vec& x, const Arith& ar) {
  return v == NormVariant::RMS ? rms_norm(x, ar) : layer_norm(x, ar);
}

Mat normalize_columns(NormVariant v, const Mat& X, const Arith& ar) {
  Mat Y(X.rows(), X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) Y.set_col(j, normalize(v, X.col(j), ar));
  return Y;
}

Vec relu(const Vec& x) {
  Vec y = x;
  for (auto& v : y)
    if (!(v > 0.0)) v = 0.0;
  return y;
}

Vec perceptron(const BlockWeights& w, const Vec& x, const Arith& ar) {
  return fl_affine(w.A2, relu(fl_affine(w.A1, x, w.b1, ar)), w.b2, ar);
}

Mat perceptron_columns(const BlockWeights& w, const Mat& X, const Arith& ar) {
  Mat Y(w.A2.rows(), X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) Y.set_col(j, perceptron(w, X.col(j), ar));
  return Y;
}

namespace {

double scaled_score(double raw, double sqrt_d, const Arith& ar) { return ar.div(raw, sqrt_d); }

}  // namespace

Vec simscores(const Mat& Wq, const Mat& Wk, const Mat& X, const Arith& ar) {
  if (X.cols() == 0) throw PreconditionError("simscores: X has no columns");
  const double sqrt_d = std::sqrt(static_cast<double>(X.rows()));
  const Vec q = fl_matvec(Wq, X.col(X.cols() - 1), ar);
  Vec s(X.cols());
  for (std::size_t i = 0; i < X.cols(); ++i)
    s[i] = scaled_score(fl_dot(fl_matvec(Wk, X.col(i), ar), q, ar), sqrt_d, ar);
  return s;
}

Vec softmax(const Vec& s, const Arith& ar, SoftmaxMode mode) {
  if (s.empty()) throw PreconditionError("softmax: empty input");
  Vec e(s.size());
  if (mode == SoftmaxMode::Unshifted) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::fabs(s[i]) > kSoftmaxScoreLimit)
        throw DomainError("softmax: score magnitude exceeds the overflow limit");
      e[i] = ar.exp(s[i]);
    }
  } else {
    double m = s[0];
    for (double v : s) m = std::max(m, v);
    for (std::size_t i = 0; i < s.size(); ++i) e[i] = ar.exp(ar.sub(s[i], m));
  }
  const double total = fl_sum(e, ar);
  Vec p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = ar.div(e[i], total);
  return p;
}

Mat self_attention(const BlockWeights& w, const Mat& X, const Arith& ar, SoftmaxMode mode) {
  const std::size_t d = X.rows();
  const std::size_t n = X.cols();
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  std::vector<Vec> cols(n);
  std::vector<Vec> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    cols[i] = X.col(i);
    keys[i] = fl_matvec(w.Wk, cols[i], ar);
  }
  Mat out(d, n);
  Vec v(d);
  for (std::size_t t = 0; t < n; ++t) {
    const Vec q = fl_matvec(w.Wq, cols[t], ar);
    Vec s(t + 1);
    for (std::size_t i = 0; i <= t; ++i) s[i] = scaled_score(fl_dot(keys[i], q, ar), sqrt_d, ar);
    const Vec p = softmax(s, ar, mode);
    // X_t p first, then the value projection.
    for (std::size_t r = 0; r < d; ++r) {
      double acc = ar.mul(cols[0][r], p[0]);
      for (std::size_t i = 1; i <= t; ++i) acc = ar.add(acc, ar.mul(cols[i][r], p[i]));
      v[r] = acc;
    }
    out.set_col(t, fl_matvec(w.Wv, v, ar));
  }
  return out;
}

Mat attention_sublayer(const TransformerConfig& cfg, std::size_t layer, const Mat& X,
                       const Arith& ar) {
  const auto& w = cfg.layers.at(layer);
  if (cfg.placement == Placement::PreAttention)
    return fl_add(X, self_attention(w, normalize_columns(cfg.variant, X, ar), ar, cfg.softmax), ar);
  return fl_add(X, normalize_columns(cfg.variant, self_attention(w, X, ar, cfg.softmax), ar), ar);
}

Mat perceptron_sublayer(const TransformerConfig& cfg, std::size_t layer, const Mat& Y,
                        const Arith& ar) {
  const auto& w = cfg.layers.at(layer);
  return fl_add(Y, perceptron_columns(w, normalize_columns(cfg.variant, Y, ar), ar), ar);
}

Mat transformer_block(const TransformerConfig& cfg, std::size_t layer, const Mat& X,
                      const Arith& ar) {
  if (X.rows() != cfg.d) throw PreconditionError("transformer_block: input must have d rows");
  return perceptron_sublayer(cfg, layer, attention_sublayer(cfg, layer, X, ar), ar);
}

std::vector<Mat> deep_transformer(const TransformerConfig& cfg, const Mat& X, const Arith& ar) {
  std::vector<Mat> taps;
  taps.reserve(cfg.depth() + 1);
  taps.push_back(X);
  for (std::size_t l = 0; l < cfg.depth(); ++l) taps.push_back(transformer_block(cfg, l, taps.back(), ar));
  return taps;
}

Vec quantize(const Vec& v, const PrecisionSpec& p) {
  const Arith ar(p);
  Vec out = v;
  for (auto& x : out) x = ar.r(x);
  return out;
}

Mat quantize(const Mat& m, const PrecisionSpec& p) {
  Mat out = m;
  out.data() = quantize(m.data(), p);
  return out;
}

BlockWeights quantize(const BlockWeights& w, const PrecisionSpec& p) {
  return {quantize(w.Wq, p), quantize(w.Wk, p), quantize(w.Wv, p), quantize(w.A1, p),
          quantize(w.b1, p), quantize(w.A2, p), quantize(w.b2, p)};
}

TransformerConfig quantize(const TransformerConfig& cfg, const PrecisionSpec& p) {
  TransformerConfig out = cfg;
  for (auto& w : out.layers) w = quantize(w, p);
  return out;
}

}  // namespace fptx
