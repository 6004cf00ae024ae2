#include "qot/harness/model.hpp"

#include "qot/core/error.hpp"

namespace qot::harness {
namespace {

struct Seeded {
  nn::Rng rng;
  ortho::ToyBackbone backbone;
  ortho::OrthoHead head;
};

Seeded build_features(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  nn::Rng rng(seed);
  auto backbone = ortho::ToyBackbone::create(cfg.image_channels, cfg.backbone_channels, rng, cfg.backbone_width);
  auto head = ortho::OrthoHead::create(cfg.backbone_channels, cfg.qvit.channels, cfg.qvit.num_classes, rng);
  return {std::move(rng), std::move(backbone), std::move(head)};
}

}  // namespace

Model::Model(const ModelConfig& c, std::uint64_t seed)
    : Model([&] {
        Seeded s = build_features(c, seed);
        return Model(c, std::move(s.backbone), std::move(s.head), vit::QViT(c.qvit, s.rng));
      }()) {}

Model::Model(ModelConfig c, ortho::ToyBackbone b, ortho::OrthoHead h, vit::QViT q)
    : cfg(std::move(c)), backbone(std::move(b)), head(std::move(h)), qvit(std::move(q)) {}

nn::ParamList Model::feature_parameters() const {
  nn::ParamList out;
  if (!cfg.precomputed_features) backbone.collect("backbone", out);
  head.collect("head", out);
  return out;
}

nn::ParamList Model::qvit_parameters() const { return qvit.parameters(); }

nn::ParamList Model::parameters() const {
  nn::ParamList out = feature_parameters();
  for (auto& p : qvit_parameters()) out.push_back(std::move(p));
  return out;
}

ag::Var Model::backbone_features(const ag::Var& input) const {
  if (input.shape() != cfg.input_shape())
    throw DimensionError("model input " + to_string(input.shape()) + ", expected " + to_string(cfg.input_shape()));
  return cfg.precomputed_features ? input : backbone.forward(input);
}

QuatTensor Model::features(const Tensor& input) const {
  if (cfg.precomputed_features) {
    if (input.shape() != cfg.input_shape())
      throw DimensionError("model input " + to_string(input.shape()) + ", expected " + to_string(cfg.input_shape()));
    return ortho::features_to_quaternion(input, head);
  }
  return ortho::extract_pipeline(input, backbone, head);
}

Tensor Model::logits(const Tensor& input) const { return qvit.logits(features(input)); }

}  // namespace qot::harness
