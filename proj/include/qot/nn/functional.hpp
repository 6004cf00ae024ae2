#pragma once

#include <span>

#include "qot/autograd/ops.hpp"
#include "qot/core/quat_tensor.hpp"
#include "qot/nn/layers.hpp"

namespace qot::nn {

/// Number of vector pairs averaged by the orthogonal loss: the three unordered
/// pairs {1,2}, {1,3}, {2,3}. Identical inputs therefore give exactly 1.
inline constexpr int kOrthoPairCount = 3;

struct LossWeights {
  double lambda = 1.0;
  /// Throws ContractError unless lambda is finite and ≥ 0.
  void validate() const;
};

/// Softmax along the last logical axis of [... × T × 4], independently for each
/// of the four quaternion components.
ag::Var component_softmax(const ag::Var& x);
/// Global average pooling [H × W × C] → [C].
ag::Var gap(const ag::Var& x);
ag::Var combined_loss(const ag::Var& ce, const ag::Var& ortho, const LossWeights& w);

// Value-level conveniences over the same kernels (no graph is recorded).
QuatTensor qfc_forward(const QuatTensor& x, const QFCLayer& layer);
QuatTensor qconv_forward(const QuatTensor& x, const QConvLayer& layer);
QuatTensor component_softmax(const QuatTensor& x);
QuatTensor layer_norm(const QuatTensor& x, const Tensor& gamma, const Tensor& beta);
QuatTensor gelu(const QuatTensor& x);
Tensor gap(const Tensor& x);
double orthogonal_loss(const Tensor& v1, const Tensor& v2, const Tensor& v3);
double cross_entropy(const Tensor& logits, std::span<const int> labels);
double combined_loss(double ce, double ortho, const LossWeights& w);

}  // namespace qot::nn
