#pragma once

#include <span>
#include <vector>

#include "qot/autograd/var.hpp"

// Differentiable operation set. Quaternion tensors use the interleaved layout
// (trailing axis of extent 4); their parameters are differentiated component-wise.
// Optional bias arguments accept a default-constructed Var.

namespace qot::ag {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double s);
/// x + b where b's shape is a trailing suffix of x's shape.
Var add_broadcast(const Var& x, const Var& b);
Var sum(const Var& x);
Var mean(const Var& x);

Var reshape(const Var& x, Shape shape);
/// Swap axes 0 and 1; trailing axes move as a block.
Var transpose01(const Var& x);
Var concat(std::span<const Var> parts, std::size_t axis);
/// Quaternion conjugate of every element.
Var conjugate(const Var& x);
/// Stack four same-shaped real tensors into a new trailing component axis.
Var stack_components(const Var& r, const Var& i, const Var& j, const Var& k);

Var relu(const Var& x);
/// Exact GELU x·Φ(x), elementwise.
Var gelu(const Var& x);
/// Max-subtracted softmax along `axis`.
Var softmax(const Var& x, std::size_t axis);
/// Normalise each trailing group of gamma.size() elements to zero mean and unit
/// variance, then apply gamma/beta (both shaped like the group).
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

/// x[B×In] · w[In×Out] + b[Out].
Var linear(const Var& x, const Var& w, const Var& b);
Var matmul(const Var& a, const Var& b);
/// Real cross-correlation on HWC maps; kernel [kh×kw×Cin×Cout].
Var conv2d(const Var& x, const Var& kernel, const Var& b, std::size_t stride, std::size_t padding);
/// Mean over the two spatial axes of an [H×W×C] map → [C].
Var spatial_mean(const Var& x);

/// Elementwise Hamilton product of same-shaped quaternion tensors.
Var hamilton(const Var& a, const Var& b);
/// Quaternion matrix product [m×n×4] · [n×p×4].
Var quat_matmul(const Var& a, const Var& b);
/// out[t][o] = b[o] + Σ_d w[d][o] ⊗ x[t][d]; x [T×Din×4], w [Din×Dout×4], b [Dout×4].
Var quat_linear(const Var& x, const Var& w, const Var& b);
/// Quaternion cross-correlation, kernel on the left of every product.
/// x [H×W×Cin×4], kernel [kh×kw×Cin×Cout×4], b [Cout×4].
Var quat_conv2d(const Var& x, const Var& kernel, const Var& b, std::size_t stride, std::size_t padding);

/// Mean over rows of −log softmax(logits)[label]; logits [B×K].
Var cross_entropy(const Var& logits, std::span<const int> labels);
/// (|cos(v1,v2)| + |cos(v1,v3)| + |cos(v2,v3)|) / 3 over flattened vectors.
Var orthogonal_loss(const Var& v1, const Var& v2, const Var& v3);

/// Spatial output extent of a convolution, or DimensionError.
std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t padding);

}  // namespace qot::ag
