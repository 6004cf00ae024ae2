#pragma once

#include <cstdint>
#include <vector>

#include "qot/nn/layers.hpp"

namespace qot::harness {

struct SgdHyper {
  double lr = 0.01;
  double momentum = 0.0;
};

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Tensor m, v;
  std::uint64_t step = 0;
};

/// v ← momentum·v + g; p ← p − lr·v. Throws ContractError on shape mismatch.
void sgd_update(Tensor& param, const Tensor& grad, Tensor& velocity, const SgdHyper& h);
/// Bias-corrected Adam update of every real component.
void adam_update(Tensor& param, const Tensor& grad, AdamState& state, const AdamHyper& h);

class Optimizer {
public:
  virtual ~Optimizer() = default;
  /// Apply one update from the accumulated gradients. Parameters that received
  /// no gradient since the last zero_grad are left untouched.
  virtual void step() = 0;
  void zero_grad();
  const nn::ParamList& params() const { return params_; }

protected:
  explicit Optimizer(nn::ParamList params) : params_(std::move(params)) {}
  nn::ParamList params_;
};

class Sgd final : public Optimizer {
public:
  Sgd(nn::ParamList params, SgdHyper h);
  void step() override;

private:
  SgdHyper h_;
  std::vector<Tensor> velocity_;
};

class Adam final : public Optimizer {
public:
  Adam(nn::ParamList params, AdamHyper h);
  void step() override;

private:
  AdamHyper h_;
  std::vector<AdamState> state_;
};

}  // namespace qot::harness
