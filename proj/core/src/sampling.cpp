#include "fptx/sampling.hpp"

#include <cmath>

namespace fptx {

Mat random_matrix(CounterRng& rng, std::size_t rows, std::size_t cols, double sd) {
  Mat m(rows, cols);
  for (auto& v : m.data()) v = rng.normal(0.0, sd);
  return m;
}

BlockWeights random_weights(CounterRng& rng, std::size_t d, std::size_t D, double sd) {
  BlockWeights w;
  const double s = sd / std::sqrt(static_cast<double>(d));
  w.Wq = random_matrix(rng, d, d, s);
  w.Wk = random_matrix(rng, d, d, s);
  w.Wv = random_matrix(rng, d, d, sd);
  w.A1 = random_matrix(rng, D, d, sd);
  w.b1 = random_matrix(rng, D, 1, sd).data();
  w.A2 = random_matrix(rng, d, D, sd);
  w.b2 = random_matrix(rng, d, 1, sd).data();
  return w;
}

LayerPoint random_layer_point(LayerKind kind, CounterRng& rng, std::size_t d, std::size_t n,
                              std::size_t D) {
  LayerPoint pt;
  pt.kind = kind;
  switch (kind) {
    case LayerKind::Centring:
    case LayerKind::RMSNorm:
    case LayerKind::LayerNorm:
      pt.input = random_matrix(rng, d, 1);
      break;
    case LayerKind::Affine:
    case LayerKind::Perceptron:
      pt.weights = random_weights(rng, d, D);
      pt.input = random_matrix(rng, d, 1);
      break;
    case LayerKind::Softmax:
      pt.input = random_matrix(rng, n, 1);
      break;
    case LayerKind::SimScores:
    case LayerKind::Attention:
      pt.weights = random_weights(rng, d, D);
      pt.input = random_matrix(rng, d, n);
      break;
    case LayerKind::MatMulPair:
      pt.input = random_matrix(rng, d, n);
      pt.input2 = random_matrix(rng, n, D);
      break;
  }
  return pt;
}

TransformerConfig random_config(CounterRng& rng, std::size_t d, std::size_t D, std::size_t L,
                                NormVariant v, double sd) {
  TransformerConfig cfg;
  cfg.d = d;
  cfg.D = D;
  cfg.variant = v;
  for (std::size_t l = 0; l < L; ++l) cfg.layers.push_back(random_weights(rng, d, D, sd));
  cfg.validate();
  return cfg;
}

}  // namespace fptx
