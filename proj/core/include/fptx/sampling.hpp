#pragma once

#include <cstddef>

#include "fptx/jacobians.hpp"
#include "fptx/net.hpp"
#include "fptx/rng.hpp"

namespace fptx {

// Gaussian block with entries N(0, sd^2); W_q, W_k get sd / sqrt(d) so that
// similarity scores stay O(1) on N(0, 1) inputs. Biases are N(0, sd^2).
BlockWeights random_weights(CounterRng& rng, std::size_t d, std::size_t D, double sd = 1.0);

Mat random_matrix(CounterRng& rng, std::size_t rows, std::size_t cols, double sd = 1.0);

// Random linearisation point of the given kind: vector layers take d entries,
// softmax takes n scores, sequence layers take a d x n matrix, and the matrix
// product takes (d x n, n x D).
LayerPoint random_layer_point(LayerKind kind, CounterRng& rng, std::size_t d, std::size_t n,
                              std::size_t D);

// L independent random blocks.
TransformerConfig random_config(CounterRng& rng, std::size_t d, std::size_t D, std::size_t L,
                                NormVariant v, double sd = 1.0);

}  // namespace fptx
