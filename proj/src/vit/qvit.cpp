#include "qot/vit/qvit.hpp"

#include <cmath>

#include "qot/core/error.hpp"

namespace qot::vit {

PositionEmbedding PositionEmbedding::create(std::size_t tokens, std::size_t token_dim, nn::Rng& rng) {
  return {ag::Var::parameter(nn::normal_tensor({tokens, token_dim, 4}, 0.02, rng))};
}

PositionEmbedding PositionEmbedding::zeros(std::size_t tokens, std::size_t token_dim) {
  return {ag::Var::parameter(Tensor({tokens, token_dim, 4}))};
}

ag::Var channel_patch_encode(const ag::Var& x, const PositionEmbedding& pe) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[3] != 4) throw DimensionError("channel_patch_encode expects [H × W × C × 4], got " + to_string(s));
  const Shape expected{s[2], s[0] * s[1], 4};
  if (pe.table.shape() != expected) {
    throw DimensionError("channel_patch_encode: position embedding " + to_string(pe.table.shape()) +
                         " does not match input " + to_string(s));
  }
  ag::Var tokens = ag::transpose01(ag::reshape(x, {s[0] * s[1], s[2], 4}));
  return ag::add(tokens, pe.table);
}

QuatTensor channel_patch_encode(const QuatTensor& x, const PositionEmbedding& pe) {
  ag::NoGradGuard guard;
  return QuatTensor(channel_patch_encode(ag::Var::constant(x.base()), pe).value());
}

QMHSA QMHSA::create(std::size_t embed_dim, std::size_t heads, nn::Rng& rng, bool conjugate_keys) {
  if (heads == 0 || embed_dim % heads != 0) {
    throw ContractError("QMHSA: embed_dim " + std::to_string(embed_dim) + " not divisible by heads " +
                        std::to_string(heads));
  }
  const std::size_t d = embed_dim / heads;
  QMHSA m;
  for (std::size_t h = 0; h < heads; ++h) {
    Head head{nn::QFCLayer::create(embed_dim, d, rng), nn::QFCLayer::create(embed_dim, d, rng),
              nn::QFCLayer::create(embed_dim, d, rng)};
    m.heads.push_back(std::move(head));
  }
  m.output = nn::QFCLayer::create(heads * d, embed_dim, rng);
  m.conjugate_keys = conjugate_keys;
  return m;
}

ag::Var QMHSA::head_attention(const Head& h, const ag::Var& seq) const {
  const ag::Var q = h.query.forward(seq);
  ag::Var kt = ag::transpose01(h.key.forward(seq));
  if (conjugate_keys) kt = ag::conjugate(kt);
  const double d = static_cast<double>(h.query.out_features());
  return nn::component_softmax(ag::scale(ag::quat_matmul(q, kt), 1.0 / std::sqrt(d)));
}

ag::Var QMHSA::forward(const ag::Var& seq) const {
  if (seq.shape().size() != 3 || seq.shape()[2] != 4) {
    throw DimensionError("QMHSA expects [T × E × 4], got " + to_string(seq.shape()));
  }
  std::vector<ag::Var> outputs;
  outputs.reserve(heads.size());
  for (const Head& h : heads) outputs.push_back(ag::quat_matmul(head_attention(h, seq), h.value.forward(seq)));
  return output.forward(ag::concat(outputs, 1));
}

std::vector<QuatTensor> QMHSA::attention_maps(const QuatTensor& seq) const {
  ag::NoGradGuard guard;
  const ag::Var s = ag::Var::constant(seq.base());
  std::vector<QuatTensor> maps;
  for (const Head& h : heads) maps.emplace_back(head_attention(h, s).value());
  return maps;
}

void QMHSA::collect(const std::string& prefix, nn::ParamList& out) const {
  for (std::size_t h = 0; h < heads.size(); ++h) {
    const std::string p = prefix + ".head" + std::to_string(h);
    heads[h].query.collect(p + ".query", out);
    heads[h].key.collect(p + ".key", out);
    heads[h].value.collect(p + ".value", out);
  }
  output.collect(prefix + ".output", out);
}

QCFFN QCFFN::create(std::size_t embed_dim, std::size_t hidden, std::size_t conv_count, nn::Rng& rng) {
  if (conv_count == 0) throw ContractError("QC-FFN needs at least one convolution");
  QCFFN f;
  for (std::size_t c = 0; c < conv_count; ++c) {
    const std::size_t in = c == 0 ? embed_dim : hidden;
    const std::size_t out = c + 1 == conv_count ? embed_dim : hidden;
    f.convs.push_back(nn::QConvLayer::create(1, 1, in, out, rng));
    if (c + 1 < conv_count) f.norms.push_back(nn::LayerNorm::create({out, 4}));
  }
  return f;
}

ag::Var QCFFN::forward(const ag::Var& x) const {
  ag::Var y = convs.front().forward_tokens(x);
  for (std::size_t c = 1; c < convs.size(); ++c) y = convs[c].forward_tokens(ag::gelu(norms[c - 1].forward(y)));
  return y;
}

void QCFFN::collect(const std::string& prefix, nn::ParamList& out) const {
  for (std::size_t c = 0; c < convs.size(); ++c) {
    convs[c].collect(prefix + ".conv" + std::to_string(c), out);
    if (c < norms.size()) norms[c].collect(prefix + ".norm" + std::to_string(c), out);
  }
}

QViTBlock QViTBlock::create(const QViTConfig& cfg, nn::Rng& rng) {
  QViTBlock b{QMHSA::create(cfg.embed_dim, cfg.heads, rng, cfg.conjugate_keys),
              nn::LayerNorm::create({cfg.embed_dim, 4}),
              QCFFN::create(cfg.embed_dim, cfg.ffn_hidden, cfg.ffn_convs, rng)};
  return b;
}

ag::Var QViTBlock::forward(const ag::Var& x) const {
  const ag::Var normed = norm.forward(ag::add(x, attention.forward(x)));
  return ag::add(normed, ffn.forward(normed));
}

void QViTBlock::collect(const std::string& prefix, nn::ParamList& out) const {
  attention.collect(prefix + ".attn", out);
  norm.collect(prefix + ".norm", out);
  ffn.collect(prefix + ".ffn", out);
}

QViT::QViT(const QViTConfig& cfg, nn::Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  position = PositionEmbedding::create(cfg_.tokens(), cfg_.token_dim(), rng);
  input_projection = nn::QFCLayer::create(cfg_.token_dim(), cfg_.embed_dim, rng);
  for (std::size_t b = 0; b < cfg_.blocks; ++b) blocks.push_back(QViTBlock::create(cfg_, rng));
  final_norm = nn::LayerNorm::create({cfg_.embed_dim, 4});
  for (std::size_t l = 0; l < cfg_.mlp_layers; ++l) {
    mlp.push_back(nn::QFCLayer::create(l == 0 ? cfg_.flat_width() : cfg_.mlp_width(), cfg_.mlp_width(), rng));
  }
  classifier = nn::Linear::create(4 * cfg_.mlp_width(), cfg_.num_classes, rng);
}

ag::Var QViT::forward(const ag::Var& q) const {
  const Shape expected{cfg_.height, cfg_.width, cfg_.channels, 4};
  if (q.shape() != expected) {
    throw DimensionError("QViT input " + to_string(q.shape()) + " does not match config " + to_string(expected));
  }
  ag::Var x = input_projection.forward(channel_patch_encode(q, position));
  for (const QViTBlock& b : blocks) x = b.forward(x);
  x = final_norm.forward(x);
  // Flatten token-major, then quaternion channel, then component.
  x = ag::reshape(x, {1, cfg_.flat_width(), 4});
  for (std::size_t l = 0; l < mlp.size(); ++l) {
    if (l > 0) x = ag::gelu(x);
    x = mlp[l].forward(x);
  }
  const ag::Var logits = classifier.forward(ag::reshape(x, {1, 4 * cfg_.mlp_width()}));
  return ag::reshape(logits, {cfg_.num_classes});
}

Tensor QViT::logits(const QuatTensor& q) const {
  ag::NoGradGuard guard;
  return forward(ag::Var::constant(q.base())).value();
}

nn::ParamList QViT::parameters() const {
  nn::ParamList out;
  out.push_back({"qvit.position", position.table});
  input_projection.collect("qvit.input_projection", out);
  for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b].collect("qvit.block" + std::to_string(b), out);
  final_norm.collect("qvit.final_norm", out);
  for (std::size_t l = 0; l < mlp.size(); ++l) mlp[l].collect("qvit.mlp" + std::to_string(l), out);
  classifier.collect("qvit.classifier", out);
  return out;
}

}  // namespace qot::vit
