#pragma once

#include <vector>

#include "qot/nn/layers.hpp"
#include "qot/vit/config.hpp"

namespace qot::vit {

/// Real-valued counterpart of QViT under the same config: every quaternion
/// layer D_in → D_out becomes a real layer 4·D_in → 4·D_out, attention uses the
/// scaled dot product, and each token carries 4·H·W reals. Used as the
/// parameter/FLOP baseline for the quaternion model.
class RealViT {
public:
  RealViT(const QViTConfig& cfg, nn::Rng& rng);

  const QViTConfig& config() const { return cfg_; }
  /// q [H × W × C × 4] (read as reals) → logits [K]
  ag::Var forward(const ag::Var& q) const;
  nn::ParamList parameters() const;

private:
  struct Head {
    nn::Linear query, key, value;
  };
  struct Block {
    std::vector<Head> heads;
    nn::Linear attn_out;
    nn::LayerNorm norm;
    std::vector<nn::Linear> ffn;
    std::vector<nn::LayerNorm> ffn_norms;
  };

  ag::Var block_forward(const Block& b, const ag::Var& x) const;

  QViTConfig cfg_;
  ag::Var position_;
  nn::Linear input_projection_;
  std::vector<Block> blocks_;
  nn::LayerNorm final_norm_;
  std::vector<nn::Linear> mlp_;
  nn::Linear classifier_;
};

}  // namespace qot::vit
