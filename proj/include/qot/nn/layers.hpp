#pragma once

#include <string>
#include <vector>

#include "qot/autograd/grad_check.hpp"
#include "qot/autograd/ops.hpp"
#include "qot/core/quat_tensor.hpp"
#include "qot/nn/init.hpp"

namespace qot::nn {

/// Named trainable tensors, in a stable order (checkpoints rely on it).
using ParamList = std::vector<ag::NamedVar>;

std::size_t count_reals(const ParamList& params);

/// Quaternion fully-connected layer: out[t][o] = b[o] + Σ_d W[d][o] ⊗ x[t][d].
struct QFCLayer {
  ag::Var weight;  // [D_in × D_out × 4]
  ag::Var bias;    // [D_out × 4]

  static QFCLayer create(std::size_t in, std::size_t out, Rng& rng);
  static QFCLayer zeros(std::size_t in, std::size_t out);
  /// Square layer with quaternion 1 on the diagonal and zero bias.
  static QFCLayer identity(std::size_t width);

  std::size_t in_features() const { return weight.shape()[0]; }
  std::size_t out_features() const { return weight.shape()[1]; }

  /// x [T × D_in × 4] → [T × D_out × 4]
  ag::Var forward(const ag::Var& x) const { return ag::quat_linear(x, weight, bias); }
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Quaternion convolution on [H × W × C_in × 4] maps, kernel on the left of each product.
struct QConvLayer {
  ag::Var kernel;  // [k_h × k_w × C_in × C_out × 4]
  ag::Var bias;    // [C_out × 4]
  std::size_t stride = 1;
  std::size_t padding = 0;

  static QConvLayer create(std::size_t kh, std::size_t kw, std::size_t in, std::size_t out, Rng& rng,
                           std::size_t stride = 1, std::size_t padding = 0);
  static QConvLayer zeros(std::size_t kh, std::size_t kw, std::size_t in, std::size_t out);
  /// 1×1 kernel with quaternion 1 on the channel diagonal.
  static QConvLayer identity(std::size_t channels);

  ag::Var forward(const ag::Var& x) const { return ag::quat_conv2d(x, kernel, bias, stride, padding); }
  /// Pointwise (1×1, stride 1) application to a token sequence [T × C_in × 4].
  ag::Var forward_tokens(const ag::Var& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Real affine layer x[B × In] · W + b.
struct Linear {
  ag::Var weight;  // [In × Out]
  ag::Var bias;    // [Out]

  static Linear create(std::size_t in, std::size_t out, Rng& rng);
  ag::Var forward(const ag::Var& x) const { return ag::linear(x, weight, bias); }
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Real convolution on HWC maps.
struct Conv2d {
  ag::Var kernel;  // [k_h × k_w × C_in × C_out]
  ag::Var bias;    // [C_out]
  std::size_t stride = 1;
  std::size_t padding = 0;

  static Conv2d create(std::size_t kh, std::size_t kw, std::size_t in, std::size_t out, Rng& rng,
                       std::size_t stride = 1, std::size_t padding = 0);
  ag::Var forward(const ag::Var& x) const { return ag::conv2d(x, kernel, bias, stride, padding); }
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Layer normalization over the trailing `shape` (for quaternion tokens [D × 4]:
/// all 4·D reals of a token jointly). eps = 1e-5 inside the square root.
struct LayerNorm {
  ag::Var gamma;
  ag::Var beta;

  static LayerNorm create(const Shape& shape);
  ag::Var forward(const ag::Var& x) const { return ag::layer_norm(x, gamma, beta, 1e-5); }
  void collect(const std::string& prefix, ParamList& out) const;
};

}  // namespace qot::nn
