#pragma once

#include <cstdint>

#include "qot/harness/config.hpp"
#include "qot/ortho/ortho.hpp"
#include "qot/vit/qvit.hpp"

namespace qot::harness {

/// Backbone, orthogonal decomposition head and Q-ViT classifier, initialized
/// in that order from one seed.
struct Model {
  Model(const ModelConfig& cfg, std::uint64_t seed);

  ModelConfig cfg;
  ortho::ToyBackbone backbone;
  ortho::OrthoHead head;
  vit::QViT qvit;

  /// Backbone and head (stage 1).
  nn::ParamList feature_parameters() const;
  /// Q-ViT (stage 2).
  nn::ParamList qvit_parameters() const;
  nn::ParamList parameters() const;

  /// Backbone output for an input, or the input itself in precomputed mode.
  ag::Var backbone_features(const ag::Var& input) const;
  QuatTensor features(const Tensor& input) const;
  Tensor logits(const Tensor& image) const;

private:
  Model(ModelConfig cfg, ortho::ToyBackbone backbone, ortho::OrthoHead head, vit::QViT qvit);
};

}  // namespace qot::harness
