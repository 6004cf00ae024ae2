#include "qot/nn/functional.hpp"

#include <cmath>

#include "qot/core/error.hpp"

namespace qot::nn {

void LossWeights::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ContractError("loss weight lambda must be finite and non-negative, got " + std::to_string(lambda));
  }
}

ag::Var component_softmax(const ag::Var& x) {
  const Shape& s = x.shape();
  if (s.size() < 2 || s.back() != 4) throw DimensionError("component_softmax expects [... × T × 4], got " + to_string(s));
  return ag::softmax(x, s.size() - 2);
}

ag::Var gap(const ag::Var& x) { return ag::spatial_mean(x); }

ag::Var combined_loss(const ag::Var& ce, const ag::Var& ortho, const LossWeights& w) {
  w.validate();
  return ag::add(ce, ag::scale(ortho, w.lambda));
}

namespace {
ag::Var value(const Tensor& t) { return ag::Var::constant(t); }
}  // namespace

QuatTensor qfc_forward(const QuatTensor& x, const QFCLayer& layer) {
  ag::NoGradGuard guard;
  return QuatTensor(layer.forward(value(x.base())).value());
}

QuatTensor qconv_forward(const QuatTensor& x, const QConvLayer& layer) {
  ag::NoGradGuard guard;
  return QuatTensor(layer.forward(value(x.base())).value());
}

QuatTensor component_softmax(const QuatTensor& x) {
  ag::NoGradGuard guard;
  return QuatTensor(component_softmax(value(x.base())).value());
}

QuatTensor layer_norm(const QuatTensor& x, const Tensor& gamma, const Tensor& beta) {
  ag::NoGradGuard guard;
  return QuatTensor(ag::layer_norm(value(x.base()), value(gamma), value(beta), 1e-5).value());
}

QuatTensor gelu(const QuatTensor& x) {
  ag::NoGradGuard guard;
  return QuatTensor(ag::gelu(value(x.base())).value());
}

Tensor gap(const Tensor& x) {
  ag::NoGradGuard guard;
  return ag::spatial_mean(value(x)).value();
}

double orthogonal_loss(const Tensor& v1, const Tensor& v2, const Tensor& v3) {
  ag::NoGradGuard guard;
  return ag::orthogonal_loss(value(v1), value(v2), value(v3)).value().item();
}

double cross_entropy(const Tensor& logits, std::span<const int> labels) {
  ag::NoGradGuard guard;
  return ag::cross_entropy(value(logits), labels).value().item();
}

double combined_loss(double ce, double ortho, const LossWeights& w) {
  w.validate();
  return ce + w.lambda * ortho;
}

}  // namespace qot::nn
