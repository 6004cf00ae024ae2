#pragma once

#include <vector>

#include "qot/nn/functional.hpp"
#include "qot/nn/layers.hpp"
#include "qot/vit/config.hpp"

namespace qot::vit {

/// Learned quaternion position embedding added to the channel-token sequence.
struct PositionEmbedding {
  ag::Var table;  // [C × H·W × 4]

  static PositionEmbedding create(std::size_t tokens, std::size_t token_dim, nn::Rng& rng);
  static PositionEmbedding zeros(std::size_t tokens, std::size_t token_dim);
};

/// Reshape an [H × W × C] quaternion map into C tokens of H·W quaternions
/// (token t = channel t, flattened row-major) and add the position embedding.
ag::Var channel_patch_encode(const ag::Var& x, const PositionEmbedding& pe);
QuatTensor channel_patch_encode(const QuatTensor& x, const PositionEmbedding& pe);

/// Quaternion multi-head self-attention.
struct QMHSA {
  struct Head {
    nn::QFCLayer query, key, value;  // E → head_dim each
  };
  std::vector<Head> heads;
  nn::QFCLayer output;  // heads·head_dim → E
  bool conjugate_keys = false;

  static QMHSA create(std::size_t embed_dim, std::size_t heads, nn::Rng& rng, bool conjugate_keys = false);

  /// seq [T × E × 4] → [T × E × 4]
  ag::Var forward(const ag::Var& seq) const;
  /// Per-head attention weights [T × T × 4] (component softmax over keys).
  std::vector<QuatTensor> attention_maps(const QuatTensor& seq) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

private:
  ag::Var head_attention(const Head& h, const ag::Var& seq) const;
};

/// Quaternion convolutional feed-forward network: pointwise QConv E → hidden,
/// then (LayerNorm, GELU, QConv) repeated until the last conv maps back to E.
struct QCFFN {
  std::vector<nn::QConvLayer> convs;
  std::vector<nn::LayerNorm> norms;  // one fewer than convs

  static QCFFN create(std::size_t embed_dim, std::size_t hidden, std::size_t conv_count, nn::Rng& rng);
  ag::Var forward(const ag::Var& x) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;
};

/// y = x + QMHSA(x); X = LayerNorm(y); out = X + QC-FFN(X).
struct QViTBlock {
  QMHSA attention;
  nn::LayerNorm norm;
  QCFFN ffn;

  static QViTBlock create(const QViTConfig& cfg, nn::Rng& rng);
  ag::Var forward(const ag::Var& x) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;
};

/// The full quaternion vision transformer: channel patch encoder, input
/// projection, N blocks, final LayerNorm, Q-MLP and a real classification head.
class QViT {
public:
  QViT(const QViTConfig& cfg, nn::Rng& rng);

  const QViTConfig& config() const { return cfg_; }

  /// q [H × W × C × 4] → logits [K]
  ag::Var forward(const ag::Var& q) const;
  Tensor logits(const QuatTensor& q) const;
  nn::ParamList parameters() const;

  PositionEmbedding position;
  nn::QFCLayer input_projection;
  std::vector<QViTBlock> blocks;
  nn::LayerNorm final_norm;
  std::vector<nn::QFCLayer> mlp;
  nn::Linear classifier;

private:
  QViTConfig cfg_;
};

}  // namespace qot::vit
