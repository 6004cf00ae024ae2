#include "qot/vit/real_vit.hpp"

#include <cmath>

#include "qot/core/error.hpp"

namespace qot::vit {

RealViT::RealViT(const QViTConfig& cfg, nn::Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t E = 4 * cfg_.embed_dim, d = 4 * cfg_.head_dim(), hidden = 4 * cfg_.ffn_hidden;
  position_ = ag::Var::parameter(nn::normal_tensor({cfg_.tokens(), 4 * cfg_.token_dim()}, 0.02, rng));
  input_projection_ = nn::Linear::create(4 * cfg_.token_dim(), E, rng);
  for (std::size_t n = 0; n < cfg_.blocks; ++n) {
    Block b;
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      b.heads.push_back({nn::Linear::create(E, d, rng), nn::Linear::create(E, d, rng), nn::Linear::create(E, d, rng)});
    }
    b.attn_out = nn::Linear::create(cfg_.heads * d, E, rng);
    b.norm = nn::LayerNorm::create({E});
    for (std::size_t c = 0; c < cfg_.ffn_convs; ++c) {
      const std::size_t in = c == 0 ? E : hidden;
      const std::size_t out = c + 1 == cfg_.ffn_convs ? E : hidden;
      b.ffn.push_back(nn::Linear::create(in, out, rng));
      if (c + 1 < cfg_.ffn_convs) b.ffn_norms.push_back(nn::LayerNorm::create({out}));
    }
    blocks_.push_back(std::move(b));
  }
  final_norm_ = nn::LayerNorm::create({E});
  const std::size_t flat = 4 * cfg_.flat_width(), width = 4 * cfg_.mlp_width();
  for (std::size_t l = 0; l < cfg_.mlp_layers; ++l) mlp_.push_back(nn::Linear::create(l == 0 ? flat : width, width, rng));
  classifier_ = nn::Linear::create(width, cfg_.num_classes, rng);
}

ag::Var RealViT::block_forward(const Block& b, const ag::Var& x) const {
  const double scale = 1.0 / std::sqrt(static_cast<double>(4 * cfg_.head_dim()));
  std::vector<ag::Var> outs;
  for (const Head& h : b.heads) {
    const ag::Var scores = ag::scale(ag::matmul(h.query.forward(x), ag::transpose01(h.key.forward(x))), scale);
    outs.push_back(ag::matmul(ag::softmax(scores, 1), h.value.forward(x)));
  }
  const ag::Var normed = b.norm.forward(ag::add(x, b.attn_out.forward(ag::concat(outs, 1))));
  ag::Var y = b.ffn.front().forward(normed);
  for (std::size_t c = 1; c < b.ffn.size(); ++c) y = b.ffn[c].forward(ag::gelu(b.ffn_norms[c - 1].forward(y)));
  return ag::add(normed, y);
}

ag::Var RealViT::forward(const ag::Var& q) const {
  const Shape expected{cfg_.height, cfg_.width, cfg_.channels, 4};
  if (q.shape() != expected) {
    throw DimensionError("RealViT input " + to_string(q.shape()) + " does not match config " + to_string(expected));
  }
  const std::size_t T = cfg_.tokens();
  ag::Var tokens = ag::transpose01(ag::reshape(q, {cfg_.token_dim(), T, 4}));
  ag::Var x = ag::add(ag::reshape(tokens, {T, 4 * cfg_.token_dim()}), position_);
  x = input_projection_.forward(x);
  for (const Block& b : blocks_) x = block_forward(b, x);
  x = ag::reshape(final_norm_.forward(x), {1, 4 * cfg_.flat_width()});
  for (std::size_t l = 0; l < mlp_.size(); ++l) {
    if (l > 0) x = ag::gelu(x);
    x = mlp_[l].forward(x);
  }
  return ag::reshape(classifier_.forward(x), {cfg_.num_classes});
}

nn::ParamList RealViT::parameters() const {
  nn::ParamList out;
  out.push_back({"rvit.position", position_});
  input_projection_.collect("rvit.input_projection", out);
  for (std::size_t n = 0; n < blocks_.size(); ++n) {
    const std::string p = "rvit.block" + std::to_string(n);
    const Block& b = blocks_[n];
    for (std::size_t h = 0; h < b.heads.size(); ++h) {
      const std::string hp = p + ".attn.head" + std::to_string(h);
      b.heads[h].query.collect(hp + ".query", out);
      b.heads[h].key.collect(hp + ".key", out);
      b.heads[h].value.collect(hp + ".value", out);
    }
    b.attn_out.collect(p + ".attn.output", out);
    b.norm.collect(p + ".norm", out);
    for (std::size_t c = 0; c < b.ffn.size(); ++c) {
      b.ffn[c].collect(p + ".ffn.conv" + std::to_string(c), out);
      if (c < b.ffn_norms.size()) b.ffn_norms[c].collect(p + ".ffn.norm" + std::to_string(c), out);
    }
  }
  final_norm_.collect("rvit.final_norm", out);
  for (std::size_t l = 0; l < mlp_.size(); ++l) mlp_[l].collect("rvit.mlp" + std::to_string(l), out);
  classifier_.collect("rvit.classifier", out);
  return out;
}

}  // namespace qot::vit
