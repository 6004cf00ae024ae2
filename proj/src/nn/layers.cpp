#include "qot/nn/layers.hpp"

#include <cmath>

#include "qot/core/error.hpp"

namespace qot::nn {

std::size_t count_reals(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var.value().size();
  return n;
}

QFCLayer QFCLayer::create(std::size_t in, std::size_t out, Rng& rng) {
  return {ag::Var::parameter(uniform_tensor({in, out, 4}, quaternion_glorot_bound(in, out), rng)),
          ag::Var::parameter(Tensor({out, 4}))};
}

QFCLayer QFCLayer::zeros(std::size_t in, std::size_t out) {
  return {ag::Var::parameter(Tensor({in, out, 4})), ag::Var::parameter(Tensor({out, 4}))};
}

QFCLayer QFCLayer::identity(std::size_t width) {
  QFCLayer layer = zeros(width, width);
  layer.weight.mutable_value() = QuatTensor::identity(width).base();
  return layer;
}

void QFCLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

QConvLayer QConvLayer::create(std::size_t kh, std::size_t kw, std::size_t in, std::size_t out, Rng& rng,
                              std::size_t stride, std::size_t padding) {
  const double bound = quaternion_glorot_bound(kh * kw * in, kh * kw * out);
  return {ag::Var::parameter(uniform_tensor({kh, kw, in, out, 4}, bound, rng)),
          ag::Var::parameter(Tensor({out, 4})), stride, padding};
}

QConvLayer QConvLayer::zeros(std::size_t kh, std::size_t kw, std::size_t in, std::size_t out) {
  return {ag::Var::parameter(Tensor({kh, kw, in, out, 4})), ag::Var::parameter(Tensor({out, 4})), 1, 0};
}

QConvLayer QConvLayer::identity(std::size_t channels) {
  QConvLayer layer = zeros(1, 1, channels, channels);
  layer.kernel.mutable_value() = QuatTensor::identity(channels).base().reshape({1, 1, channels, channels, 4});
  return layer;
}

ag::Var QConvLayer::forward_tokens(const ag::Var& x) const {
  const Shape& ks = kernel.shape();
  if (ks[0] != 1 || ks[1] != 1 || stride != 1 || padding != 0) {
    throw DimensionError("forward_tokens needs a pointwise kernel, got " + to_string(ks));
  }
  if (x.shape().size() != 3) throw DimensionError("forward_tokens expects [T × C × 4], got " + to_string(x.shape()));
  const std::size_t T = x.shape()[0];
  ag::Var map = ag::reshape(x, {T, 1, x.shape()[1], 4});
  ag::Var y = ag::quat_conv2d(map, kernel, bias, 1, 0);
  return ag::reshape(y, {T, ks[3], 4});
}

void QConvLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".kernel", kernel});
  out.push_back({prefix + ".bias", bias});
}

Linear Linear::create(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  return {ag::Var::parameter(uniform_tensor({in, out}, bound, rng)), ag::Var::parameter(Tensor({out}))};
}

void Linear::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Conv2d Conv2d::create(std::size_t kh, std::size_t kw, std::size_t in, std::size_t out, Rng& rng, std::size_t stride,
                      std::size_t padding) {
  // He-uniform; every backbone conv feeds a ReLU.
  const double bound = std::sqrt(6.0 / static_cast<double>(kh * kw * in));
  return {ag::Var::parameter(uniform_tensor({kh, kw, in, out}, bound, rng)), ag::Var::parameter(Tensor({out})),
          stride, padding};
}

void Conv2d::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".kernel", kernel});
  out.push_back({prefix + ".bias", bias});
}

LayerNorm LayerNorm::create(const Shape& shape) {
  return {ag::Var::parameter(Tensor::full(shape, 1.0)), ag::Var::parameter(Tensor(shape))};
}

void LayerNorm::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

}  // namespace qot::nn
