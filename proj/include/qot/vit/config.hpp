#pragma once

#include <cstddef>

namespace qot::vit {

/// Every architectural hyperparameter of the quaternion vision transformer.
struct QViTConfig {
  std::size_t height = 7;
  std::size_t width = 7;
  std::size_t channels = 64;   // C: one token per feature channel
  std::size_t embed_dim = 64;  // E: quaternion width per token after input projection
  std::size_t heads = 8;
  std::size_t blocks = 4;      // N
  std::size_t ffn_convs = 2;   // M: quaternion convolutions in each QC-FFN
  std::size_t ffn_hidden = 128;
  std::size_t mlp_layers = 2;  // L
  std::size_t mlp_hidden = 0;  // 0: same as the flattened input width
  std::size_t num_classes = 7;
  /// Conjugate the keys in Q ⊗ Kᵀ (Hermitian transpose). Off: plain transpose.
  bool conjugate_keys = false;

  std::size_t tokens() const { return channels; }
  std::size_t token_dim() const { return height * width; }
  std::size_t head_dim() const { return embed_dim / heads; }
  /// Quaternion count of the flattened sequence fed to the Q-MLP.
  std::size_t flat_width() const { return channels * embed_dim; }
  std::size_t mlp_width() const { return mlp_hidden == 0 ? flat_width() : mlp_hidden; }

  /// Throws ContractError naming the first violated constraint.
  void validate() const;
};

}  // namespace qot::vit
