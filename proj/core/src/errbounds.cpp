#include "fptx/errbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fptx/error.hpp"

namespace fptx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Arith kExact{PrecisionSpec::native()};

double dim(std::size_t n) { return static_cast<double>(n); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ||x||_inf / ||c x||_{-inf}
double ln_ratio(const Vec& x) {
  const double m = min_abs(centring(x, kExact));
  return m == 0.0 ? kInf : norm_inf(x) / m;
}

HypothesisCheck ln_hypothesis(const Vec& x, double u, double alpha, const std::string& where) {
  const double lhs = min_abs(centring(x, kExact));
  const double rhs = alpha * 2.0 * (1.0 + u) * gamma(static_cast<long>(x.size()), u) * norm_inf(x);
  return {"centred entries bounded away from zero" + where, lhs > rhs,
          "min|c x| = " + fmt(lhs) + ", threshold " + fmt(rhs)};
}

HypothesisCheck tlp_hypothesis(const BlockWeights& w, const Vec& x, double u, double alpha,
                               const std::string& where) {
  const Vec z = add(matvec(w.A1, x), w.b1);
  const Vec mag = add(matvec(w.A1.abs(), abs(x)), abs(w.b1));
  const double c = alpha * (u + (1.0 + u) * gamma(static_cast<long>(x.size()), u));
  double worst = kInf;
  bool ok = true;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(std::fabs(z[i]) > c * mag[i])) ok = false;
    if (mag[i] > 0.0) worst = std::min(worst, std::fabs(z[i]) / mag[i]);
  }
  return {"pre-activations bounded away from zero" + where, ok,
          "min ratio " + fmt(worst) + ", threshold " + fmt(c)};
}

HypothesisCheck generic_check(const Mat& y, const std::string& what) {
  const double m = y.empty() ? 0.0 : min_abs(y.data());
  return {what + " is generic", m > 0.0, "min |entry| = " + fmt(m)};
}

std::size_t omega_size(const BlockWeights& w, const Vec& x) {
  const Vec z = add(matvec(w.A1, x), w.b1);
  return static_cast<std::size_t>(std::count_if(z.begin(), z.end(), [](double v) { return v > 0.0; }));
}

double spectral_term(const BlockWeights& w, std::size_t d, BoundResult& r) {
  const auto s = spectral_data(w.Wq, w.Wk);
  r.ingredients["sigma_abs"] = s.sigma_abs;
  r.ingredients["sigma_max"] = s.sigma_max;
  r.ingredients["sigma_min"] = s.sigma_min;
  return 1.0 + 4.0 * std::sqrt(dim(d)) * s.sigma_abs * s.sigma_max / s.sigma_min;
}

double max_col_norm2_sq(const Mat& X) {
  double m = 0.0;
  for (std::size_t t = 0; t < X.cols(); ++t) {
    const double c = norm2(X.col(t));
    m = std::max(m, c * c);
  }
  return m;
}

double max_ln_ratio(const Mat& X) {
  double m = 0.0;
  for (std::size_t t = 0; t < X.cols(); ++t) m = std::max(m, ln_ratio(X.col(t)));
  return m;
}

Vec single(const LayerPoint& pt) {
  if (pt.input.cols() != 1) throw PreconditionError("layer expects a single input column");
  return pt.input.col(0);
}

// Everything in a block bound except the trailing (a u + b rho) factor.
double block_factor(const TransformerConfig& cfg, std::size_t layer, const Mat& X, double u,
                    BoundResult& r, const std::string& where) {
  if (cfg.placement != Placement::PreAttention)
    throw CapabilityError("block bounds cover pre-attention normalisation only");
  const auto& w = cfg.layers.at(layer);
  const bool ln = cfg.variant == NormVariant::Layer;
  const std::size_t d = cfg.d;
  if (d < 2) throw PreconditionError("block bounds need d >= 2");

  const double sigma = spectral_term(w, d, r);
  const Mat Z = normalize_columns(cfg.variant, X, kExact);
  const Mat AZ = self_attention(w, Z, kExact, SoftmaxMode::Shifted);
  const Mat Y = add(X, AZ);
  r.hypotheses.push_back(generic_check(AZ, "attention output" + where));

  const double xi_res_a =
      xi_factor(ln ? XiWhich::AttnResidualLN : XiWhich::AttnResidualRMS, w, X);
  const double xi_a = xi_factor(XiWhich::Attention, w, Z);

  double chi_m = 0.0;
  for (std::size_t t = 0; t < Y.cols(); ++t) {
    const Vec yt = Y.col(t);
    const Vec nt = normalize(cfg.variant, yt, kExact);
    const Mat ymat = Mat::column(yt);
    const double xi_res_m =
        xi_factor(ln ? XiWhich::MlpResidualLN : XiWhich::MlpResidualRMS, w, ymat);
    const double xi_m = xi_factor(XiWhich::Perceptron, w, Mat::column(nt));
    chi_m = std::max(chi_m, xi_res_m * xi_m);
    const std::string col = where + ", column " + std::to_string(t + 1);
    r.hypotheses.push_back(generic_check(Mat::column(perceptron(w, nt, kExact)), "perceptron output" + col));
    r.hypotheses.push_back(tlp_hypothesis(w, nt, u, kAlpha, col));
    if (ln) {
      r.hypotheses.push_back(ln_hypothesis(X.col(t), u, kAlpha, " (block input" + col + ")"));
      r.hypotheses.push_back(ln_hypothesis(yt, u, kAlpha, " (attention residual" + col + ")"));
    }
  }

  double factor = chi_m * xi_res_a * xi_a * sigma;
  r.ingredients["xi_attn_residual"] = xi_res_a;
  r.ingredients["xi_attention"] = xi_a;
  r.ingredients["max_t_xi_mlp_product"] = chi_m;
  r.ingredients["spectral_term"] = sigma;
  if (ln) {
    const double rx = 1.0 + max_ln_ratio(X);
    const double ry = 1.0 + max_ln_ratio(Y);
    r.ingredients["ln_ratio_input"] = rx;
    r.ingredients["ln_ratio_residual"] = ry;
    factor *= rx * ry;
  }
  return factor;
}

}  // namespace

bool BoundResult::hypotheses_hold() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(), [](const auto& h) { return h.holds; });
}

SumMatvecBound bound_summation_matvec(std::size_t d, double u) {
  if (d == 0) throw PreconditionError("bound_summation_matvec: d must be positive");
  SumMatvecBound b;
  b.summation = gamma(static_cast<long>(d) - 1, u);
  b.matvec = gamma(static_cast<long>(d), u);
  b.affine_A = u + (1.0 + u) * b.matvec;
  b.affine_b = u;
  return b;
}

BoundResult bound_layer_fresh(const LayerPoint& pt, double u) {
  BoundResult r;
  const double d = dim(pt.input.rows());
  switch (pt.kind) {
    case LayerKind::Centring: {
      const Vec x = single(pt);
      const double q = norm1(x) / min_abs(centring(x, kExact));
      r.ingredients["l1_over_min_centred"] = q;
      r.first_order_bound = (1.0 + q) * u;
      return r;
    }
    case LayerKind::RMSNorm: {
      const Vec x = single(pt);
      r.hypotheses.push_back({"input nonzero", norm_inf(x) > 0.0, ""});
      r.first_order_bound = (d / 2.0 + 3.0) * u;
      return r;
    }
    case LayerKind::LayerNorm: {
      const Vec x = single(pt);
      const double q = norm1(x) / min_abs(centring(x, kExact));
      r.ingredients["l1_over_min_centred"] = q;
      r.hypotheses.push_back(ln_hypothesis(x, u, 1.0, ""));
      r.first_order_bound = (d / 2.0 + 5.0 + 2.0 * q) * u;
      return r;
    }
    case LayerKind::Affine: {
      const Vec x = single(pt);
      const auto c = bound_summation_matvec(pt.input.rows(), u);
      const Vec num = matvec(pt.weights.A1.abs(), abs(x));
      const Vec y = add(matvec(pt.weights.A1, x), pt.weights.b1);
      double worst = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = c.affine_A * num[i] + c.affine_b * std::fabs(pt.weights.b1[i]);
        worst = std::max(worst, y[i] == 0.0 ? (e == 0.0 ? 0.0 : kInf) : e / std::fabs(y[i]));
      }
      r.first_order_bound = worst;
      return r;
    }
    case LayerKind::Perceptron: {
      const Vec x = single(pt);
      const double xi = xi_factor(XiWhich::Perceptron, pt.weights, pt.input);
      const std::size_t om = omega_size(pt.weights, x);
      r.ingredients["xi_perceptron"] = xi;
      r.ingredients["omega"] = dim(om);
      r.hypotheses.push_back(tlp_hypothesis(pt.weights, x, u, 1.0, ""));
      r.hypotheses.push_back(generic_check(evaluate_exact(pt), "perceptron output"));
      r.first_order_bound = xi * (d + dim(om) + 2.0) * u;
      return r;
    }
    case LayerKind::SimScores: {
      const double xi = xi_factor(XiWhich::SimScores, pt.weights, pt.input);
      r.ingredients["xi_simscores"] = xi;
      r.first_order_bound = xi * (3.0 * d + 1.0) * u;
      return r;
    }
    case LayerKind::Softmax: {
      r.first_order_bound = (dim(pt.input.rows()) + 3.0) * u;
      return r;
    }
    case LayerKind::Attention: {
      const Mat& X = pt.input;
      const double xi = xi_factor(XiWhich::Attention, pt.weights, X);
      double worst = 0.0;
      for (std::size_t t = 1; t <= X.cols(); ++t) {
        const Mat Xt = X.leading_cols(t);
        const double s_inf = norm_inf(simscores(pt.weights.Wq, pt.weights.Wk, Xt, kExact));
        const double xs = xi_factor(XiWhich::SimScores, pt.weights, Xt);
        const double term = 2.0 * dim(t) + d + 3.0 + (s_inf == 0.0 ? 0.0 : 2.0 * s_inf * xs * (3.0 * d + 1.0));
        worst = std::max(worst, term);
      }
      r.ingredients["xi_attention"] = xi;
      r.ingredients["max_t_term"] = worst;
      r.hypotheses.push_back(generic_check(evaluate_exact(pt), "attention output"));
      r.first_order_bound = xi * worst * u;
      return r;
    }
    case LayerKind::MatMulPair:
      break;
  }
  throw CapabilityError("no rounding error bound for this layer kind");
}

BoundResult bound_layer_perturbed(const LayerPoint& pt, double u, double rho_in) {
  if (rho_in < 0.0) throw PreconditionError("rho_in must be nonnegative");
  const double d = dim(pt.input.rows());
  switch (pt.kind) {
    case LayerKind::RMSNorm: {
      BoundResult r = bound_layer_fresh(pt, u);
      r.first_order_bound += 2.0 * rho_in;
      return r;
    }
    case LayerKind::Centring: {
      BoundResult r = bound_layer_fresh(pt, u);
      const double k = cond_cc_centring(single(pt));
      r.ingredients["kappa_cc"] = k;
      r.first_order_bound += k * rho_in;
      return r;
    }
    case LayerKind::LayerNorm: {
      const Vec x = single(pt);
      BoundResult r = bound_layer_fresh(pt, u);
      r.hypotheses.clear();
      const double ratio = ln_ratio(x);
      const double kappa = cond_cc_centring(x);
      r.ingredients["linf_over_min_centred"] = ratio;
      r.ingredients["kappa_cc_centring"] = kappa;
      r.ingredients["simplified_bound"] = 3.0 * (1.0 + ratio) * (d * u + rho_in);
      r.hypotheses.push_back(ln_hypothesis(x, u, kAlpha, ""));
      const double cap = (kAlpha - 1.0) / (1.0 + kAlpha * kappa);
      r.hypotheses.push_back({"input perturbation small", rho_in <= cap,
                              "rho_in = " + fmt(rho_in) + ", cap " + fmt(cap)});
      r.first_order_bound += 3.0 * ratio * rho_in;
      return r;
    }
    case LayerKind::Affine: {
      BoundResult r = bound_layer_fresh(pt, u);
      const double k = cond_cc_affine(pt.weights.A1, single(pt), pt.weights.b1);
      r.ingredients["kappa_cc"] = k;
      r.first_order_bound += k * rho_in;
      return r;
    }
    case LayerKind::Perceptron: {
      const Vec x = single(pt);
      BoundResult r;
      const double xi = xi_factor(XiWhich::Perceptron, pt.weights, pt.input);
      const std::size_t om = omega_size(pt.weights, x);
      r.ingredients["xi_perceptron"] = xi;
      r.ingredients["omega"] = dim(om);
      r.hypotheses.push_back(tlp_hypothesis(pt.weights, x, u, kAlpha, ""));
      r.hypotheses.push_back(generic_check(evaluate_exact(pt), "perceptron output"));
      const double k1 = cond_cc_affine(pt.weights.A1, x, pt.weights.b1);
      const double km = r.hypotheses.back().holds ? cond_cc_perceptron(pt.weights, x) : kInf;
      r.ingredients["kappa_cc_first_layer"] = k1;
      r.ingredients["kappa_cc"] = km;
      const double cap = std::min((kAlpha - 1.0) / (1.0 + kAlpha * k1), kBetaSurrogate / km);
      r.hypotheses.push_back({"input perturbation small", rho_in <= cap,
                              "rho_in = " + fmt(rho_in) + ", cap " + fmt(cap)});
      r.first_order_bound = xi * ((d + dim(om) + 2.0) * u + rho_in);
      return r;
    }
    case LayerKind::SimScores: {
      BoundResult r = bound_layer_fresh(pt, u);
      const auto k = condition_closed_form(pt, CondKind::Componentwise);
      r.ingredients["kappa_cc_bound"] = k->value;
      r.first_order_bound += k->value * rho_in;
      return r;
    }
    case LayerKind::Softmax: {
      BoundResult r = bound_layer_fresh(pt, u);
      r.first_order_bound += 2.0 * norm_inf(single(pt)) * rho_in;
      return r;
    }
    case LayerKind::Attention: {
      const Mat& X = pt.input;
      if (X.rows() < 2) throw PreconditionError("attention bounds need d >= 2");
      BoundResult r;
      const auto s = spectral_data(pt.weights.Wq, pt.weights.Wk);
      const double xi = xi_factor(XiWhich::Attention, pt.weights, X);
      const double coef =
          1.0 + 4.0 / std::sqrt(d) * s.sigma_abs * s.sigma_max / s.sigma_min * max_col_norm2_sq(X);
      r.ingredients["xi_attention"] = xi;
      r.ingredients["spectral_coefficient"] = coef;
      r.hypotheses.push_back(generic_check(evaluate_exact(pt), "attention output"));
      const double kappa = condition_generic(pt, CondKind::Componentwise);
      r.ingredients["kappa_cc"] = kappa;
      r.hypotheses.push_back({"input perturbation small", rho_in * kappa <= kBetaSurrogate,
                              "rho_in * kappa = " + fmt(rho_in * kappa)});
      r.first_order_bound = xi * coef * ((2.0 * dim(X.cols()) + 3.0 * d) * u + rho_in);
      return r;
    }
    case LayerKind::MatMulPair:
      break;
  }
  throw CapabilityError("no rounding error bound for this layer kind");
}

BoundResult bound_attention_sublayer(const TransformerConfig& cfg, std::size_t layer, const Mat& X,
                                     double u, double rho_in) {
  if (cfg.placement != Placement::PreAttention)
    throw CapabilityError("sub-block bounds cover pre-attention normalisation only");
  const auto& w = cfg.layers.at(layer);
  const bool ln = cfg.variant == NormVariant::Layer;
  const double d = dim(cfg.d);
  const double n = dim(X.cols());
  BoundResult r;
  const double sigma = spectral_term(w, cfg.d, r);
  const Mat Z = normalize_columns(cfg.variant, X, kExact);
  r.hypotheses.push_back(generic_check(self_attention(w, Z, kExact, SoftmaxMode::Shifted), "attention output"));
  const double xr = xi_factor(ln ? XiWhich::AttnResidualLN : XiWhich::AttnResidualRMS, w, X);
  const double xa = xi_factor(XiWhich::Attention, w, Z);
  r.ingredients["xi_attn_residual"] = xr;
  r.ingredients["xi_attention"] = xa;
  r.ingredients["spectral_term"] = sigma;
  if (!ln) {
    r.first_order_bound = xr * xa * sigma * ((2.0 * n + 6.0 * d) * u + 3.0 * rho_in);
    return r;
  }
  for (std::size_t t = 0; t < X.cols(); ++t)
    r.hypotheses.push_back(ln_hypothesis(X.col(t), u, kAlpha, " (column " + std::to_string(t + 1) + ")"));
  const double rx = 1.0 + max_ln_ratio(X);
  r.ingredients["ln_ratio_input"] = rx;
  r.first_order_bound = xr * xa * sigma * rx * ((2.0 * n + 7.0 * d) * u + 4.0 * rho_in);
  return r;
}

BoundResult bound_perceptron_sublayer(const TransformerConfig& cfg, std::size_t layer,
                                      const Mat& Y, double u, double rho_in) {
  const auto& w = cfg.layers.at(layer);
  const bool ln = cfg.variant == NormVariant::Layer;
  const double d = dim(cfg.d);
  BoundResult r;
  double worst = 0.0;
  for (std::size_t t = 0; t < Y.cols(); ++t) {
    const Vec y = Y.col(t);
    const Vec nt = normalize(cfg.variant, y, kExact);
    const double xr = xi_factor(ln ? XiWhich::MlpResidualLN : XiWhich::MlpResidualRMS, w, Mat::column(y));
    const double xm = xi_factor(XiWhich::Perceptron, w, Mat::column(nt));
    const double om = dim(omega_size(w, nt));
    const std::string col = " (column " + std::to_string(t + 1) + ")";
    r.hypotheses.push_back(generic_check(Mat::column(perceptron(w, nt, kExact)), "perceptron output" + col));
    r.hypotheses.push_back(tlp_hypothesis(w, nt, u, kAlpha, col));
    double b = 0.0;
    if (ln) {
      r.hypotheses.push_back(ln_hypothesis(y, u, kAlpha, col));
      b = xr * xm * (1.0 + ln_ratio(y)) * ((6.0 * d + om) * u + 4.0 * rho_in);
    } else {
      b = xr * xm * ((5.0 * d + om) * u + 3.0 * rho_in);
    }
    worst = std::max(worst, b);
  }
  r.first_order_bound = worst;
  return r;
}

BoundResult bound_block(const TransformerConfig& cfg, std::size_t layer, const Mat& X, double u,
                        double rho_in) {
  BoundResult r;
  const double factor = block_factor(cfg, layer, X, u, r, "");
  const double n = dim(X.cols());
  const double d = dim(cfg.d);
  const double D = dim(cfg.D);
  if (cfg.variant == NormVariant::RMS)
    r.first_order_bound = factor * ((6.0 * n + 23.0 * d + D) * u + 9.0 * rho_in);
  else
    r.first_order_bound = factor * ((8.0 * n + 34.0 * d + D) * u + 16.0 * rho_in);
  r.ingredients["block_factor"] = factor;
  return r;
}

namespace {

double deep_constant(const TransformerConfig& cfg, std::size_t n, std::size_t L, double u) {
  const double d = dim(cfg.d);
  const double D = dim(cfg.D);
  const double Ld = dim(L);
  if (cfg.variant == NormVariant::RMS)
    return std::pow(9.0, Ld) / 8.0 * (6.0 * dim(n) + 23.0 * d + D) * u;
  return std::pow(16.0, Ld) / 15.0 * (8.0 * dim(n) + 34.0 * d + D) * u;
}

// Walks the exact taps; calls visit(l, factor, part) after each block.
template <class Visit>
void walk_blocks(const TransformerConfig& cfg, const Mat& X0, double u, Visit visit) {
  const Arith exact(PrecisionSpec::native());
  TransformerConfig ref = cfg;
  ref.softmax = SoftmaxMode::Shifted;
  Mat X = X0;
  for (std::size_t l = 0; l < cfg.depth(); ++l) {
    BoundResult part;
    const double f = block_factor(cfg, l, X, u, part, " [layer " + std::to_string(l + 1) + "]");
    visit(l, f, part);
    if (l + 1 < cfg.depth()) X = transformer_block(ref, l, X, exact);
  }
}

}  // namespace

BoundResult bound_deep(const TransformerConfig& cfg, const Mat& X0, double u) {
  BoundResult r;
  if (cfg.depth() == 0) return r;
  double product = 1.0;
  walk_blocks(cfg, X0, u, [&](std::size_t l, double f, BoundResult& part) {
    product *= f;
    for (auto& h : part.hypotheses) r.hypotheses.push_back(std::move(h));
    r.ingredients["factor_layer_" + std::to_string(l + 1)] = f;
  });
  r.ingredients["factor_product"] = product;
  r.first_order_bound = product * deep_constant(cfg, X0.cols(), cfg.depth(), u);
  return r;
}

DeepBoundProfile bound_deep_profile(const TransformerConfig& cfg, const Mat& X0, double u) {
  DeepBoundProfile p;
  double product = 1.0;
  bool ok = true;
  walk_blocks(cfg, X0, u, [&](std::size_t l, double f, BoundResult& part) {
    product *= f;
    ok = ok && part.hypotheses_hold();
    p.bound.push_back(product * deep_constant(cfg, X0.cols(), l + 1, u));
    p.hypotheses_hold.push_back(ok);
  });
  return p;
}

ErrorMeasurement compare(const Mat& low, const Mat& ref) {
  return {rel_dist_componentwise(low, ref), rel_dist_columnwise(low, ref)};
}

ErrorMeasurement measure_error(const Evaluator& f, const Mat& input, const PrecisionSpec& low,
                               const PrecisionSpec& ref) {
  if (!(low == ref) && ref.unit_roundoff() > 1e-6 * low.unit_roundoff())
    throw PreconditionError("measure_error: reference precision is not sufficiently finer");
  const Mat a = f(input, Arith(low));
  if (low == ref) return compare(a, a);
  return compare(a, f(input, Arith(ref)));
}

Mat evaluate_layer(const LayerPoint& pt, const Mat& input, const Arith& ar) {
  const auto& w = pt.weights;
  auto one = [&input]() {
    if (input.cols() != 1) throw PreconditionError("layer expects a single input column");
    return input.col(0);
  };
  switch (pt.kind) {
    case LayerKind::Centring:
      return Mat::column(centring(one(), ar));
    case LayerKind::RMSNorm:
      return Mat::column(rms_norm(one(), ar));
    case LayerKind::LayerNorm:
      return Mat::column(layer_norm(one(), ar));
    case LayerKind::Affine:
      return Mat::column(fl_affine(w.A1, one(), w.b1, ar));
    case LayerKind::Perceptron:
      return Mat::column(perceptron(w, one(), ar));
    case LayerKind::SimScores:
      return Mat::column(simscores(w.Wq, w.Wk, input, ar));
    case LayerKind::Softmax:
      return Mat::column(softmax(one(), ar));
    case LayerKind::Attention:
      return self_attention(w, input, ar);
    case LayerKind::MatMulPair:
      break;
  }
  throw CapabilityError("evaluate_layer: unsupported kind");
}

}  // namespace fptx
