#include "qot/vit/config.hpp"

#include <string>

#include "qot/core/error.hpp"

namespace qot::vit {

void QViTConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ContractError("invalid QViT config: " + what);
  };
  require(height >= 1 && width >= 1, "height and width must be ≥ 1");
  require(channels >= 1, "channels must be ≥ 1");
  require(heads >= 1, "heads must be ≥ 1");
  require(embed_dim >= 1 && embed_dim % heads == 0,
          "embed_dim " + std::to_string(embed_dim) + " must be a positive multiple of heads " + std::to_string(heads));
  require(blocks >= 1, "blocks (N) must be ≥ 1");
  require(ffn_convs >= 1, "ffn_convs (M) must be ≥ 1");
  require(ffn_hidden >= 1, "ffn_hidden must be ≥ 1");
  require(mlp_layers >= 1, "mlp_layers (L) must be ≥ 1");
  require(num_classes >= 1, "num_classes must be ≥ 1");
}

}  // namespace qot::vit
