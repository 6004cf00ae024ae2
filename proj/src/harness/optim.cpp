#include "qot/harness/optim.hpp"

#include <cmath>

#include "qot/core/error.hpp"

namespace qot::harness {
namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw ContractError(std::string(what) + " shape " + to_string(b.shape()) + " does not match parameter " +
                        to_string(a.shape()));
}

}  // namespace

void sgd_update(Tensor& param, const Tensor& grad, Tensor& velocity, const SgdHyper& h) {
  require_same(param, grad, "gradient");
  require_same(param, velocity, "velocity");
  auto p = param.data();
  auto v = velocity.data();
  for (std::size_t n = 0; n < p.size(); ++n) {
    v[n] = h.momentum * v[n] + grad[n];
    p[n] -= h.lr * v[n];
  }
}

void adam_update(Tensor& param, const Tensor& grad, AdamState& s, const AdamHyper& h) {
  require_same(param, grad, "gradient");
  require_same(param, s.m, "first moment");
  require_same(param, s.v, "second moment");
  ++s.step;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(s.step));
  auto p = param.data();
  auto m = s.m.data();
  auto v = s.v.data();
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double g = grad[n];
    m[n] = h.beta1 * m[n] + (1.0 - h.beta1) * g;
    v[n] = h.beta2 * v[n] + (1.0 - h.beta2) * g * g;
    p[n] -= h.lr * (m[n] / c1) / (std::sqrt(v[n] / c2) + h.eps);
  }
}

void Optimizer::zero_grad() {
  for (const auto& p : params_) p.var.zero_grad();
}

Sgd::Sgd(nn::ParamList params, SgdHyper h) : Optimizer(std::move(params)), h_(h) {
  for (const auto& p : params_) velocity_.emplace_back(p.var.shape());
}

void Sgd::step() {
  for (std::size_t n = 0; n < params_.size(); ++n)
    if (params_[n].var.has_grad()) sgd_update(params_[n].var.mutable_value(), params_[n].var.grad(), velocity_[n], h_);
}

Adam::Adam(nn::ParamList params, AdamHyper h) : Optimizer(std::move(params)), h_(h) {
  for (const auto& p : params_) state_.push_back({Tensor(p.var.shape()), Tensor(p.var.shape()), 0});
}

void Adam::step() {
  for (std::size_t n = 0; n < params_.size(); ++n)
    if (params_[n].var.has_grad()) adam_update(params_[n].var.mutable_value(), params_[n].var.grad(), state_[n], h_);
}

}  // namespace qot::harness
