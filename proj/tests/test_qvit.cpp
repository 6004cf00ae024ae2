#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>

#include "qot/autograd/grad_check.hpp"
#include "qot/core/error.hpp"
#include "qot/vit/qvit.hpp"
#include "qot/vit/real_vit.hpp"
#include "vit_oracles.hpp"

using namespace qot;
using ag::Var;

namespace {

Var quat_input(const Shape& logical, std::mt19937_64& rng) { return Var::constant(oracle::random_quat(logical, rng).base()); }

oracle::QMat qmat(const Var& v) { return oracle::to_qmat(QuatTensor(v.value())); }

void expect_qmat_near(const oracle::QMat& got, const oracle::QMat& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t r = 0; r < got.size(); ++r) {
    ASSERT_EQ(got[r].size(), want[r].size());
    for (std::size_t c = 0; c < got[r].size(); ++c) {
      const auto g = got[r][c].components(), w = want[r][c].components();
      for (int n = 0; n < 4; ++n) EXPECT_NEAR(g[n], w[n], tol) << "row " << r << " col " << c << " comp " << n;
    }
  }
}

void zero_out(const ag::Var& v) {
  for (double& x : v.mutable_value().data()) x = 0.0;
}

void zero_attention(const vit::QMHSA& attn) {
  for (const auto& h : attn.heads)
    for (const auto* l : {&h.query, &h.key, &h.value}) {
      zero_out(l->weight);
      zero_out(l->bias);
    }
  zero_out(attn.output.weight);
  zero_out(attn.output.bias);
}

vit::QViTConfig tiny_config() {
  vit::QViTConfig cfg;
  cfg.height = 1;
  cfg.width = 2;
  cfg.channels = 2;
  cfg.embed_dim = 4;
  cfg.heads = 2;
  cfg.blocks = 1;
  cfg.ffn_hidden = 4;
  cfg.mlp_layers = 2;
  cfg.mlp_hidden = 3;
  cfg.num_classes = 3;
  return cfg;
}

// Key biases shift every score in a query row by the same quaternion, which the
// component softmax cancels; their gradient is identically zero, so they are
// checked for that instead of a relative error.
void certify_block_gradients(const std::function<Var()>& loss, const nn::ParamList& all) {
  nn::ParamList checked, shift_invariant;
  for (const auto& p : all) (p.name.ends_with(".key.bias") ? shift_invariant : checked).push_back(p);
  const auto report = ag::grad_check(loss, checked, 1e-5, 1e-3);
  EXPECT_TRUE(report.passed()) << report.to_text();
  ASSERT_FALSE(shift_invariant.empty());
  for (const auto& p : shift_invariant) {
    p.var.zero_grad();
    ag::backward(loss());
    for (double g : p.var.grad().data()) EXPECT_NEAR(g, 0.0, 1e-12) << p.name;
  }
}

}  // namespace

TEST(ChannelPatchEncode, DefaultGeometry) {
  std::mt19937_64 rng(1);
  const auto pe = vit::PositionEmbedding::zeros(64, 49);
  const Var seq = vit::channel_patch_encode(quat_input({7, 7, 64}, rng), pe);
  EXPECT_EQ(seq.shape(), (Shape{64, 49, 4}));
}

TEST(ChannelPatchEncode, SinglePixelTwoChannels) {
  QuatTensor x = QuatTensor::zeros({1, 1, 2});
  x.set(0, {1, 2, 3, 4});
  x.set(1, {5, 6, 7, 8});
  const QuatTensor seq = vit::channel_patch_encode(x, vit::PositionEmbedding::zeros(2, 1));
  EXPECT_EQ(seq.logical_shape(), (Shape{2, 1}));
  EXPECT_EQ(seq.get(0), (Quaternion{1, 2, 3, 4}));
  EXPECT_EQ(seq.get(1), (Quaternion{5, 6, 7, 8}));
}

TEST(ChannelPatchEncode, TokenIsChannel) {
  std::mt19937_64 rng(2);
  const QuatTensor x = oracle::random_quat({3, 2, 5}, rng);
  const QuatTensor seq = vit::channel_patch_encode(x, vit::PositionEmbedding::zeros(5, 6));
  for (std::size_t c = 0; c < 5; ++c)
    for (std::size_t p = 0; p < 6; ++p) EXPECT_EQ(seq.at(c, p), x.get(p * 5 + c));
}

TEST(ChannelPatchEncode, ZeroEmbeddingPreservesMultiset) {
  std::mt19937_64 rng(3);
  const QuatTensor x = oracle::random_quat({4, 3, 6}, rng);
  const QuatTensor seq = vit::channel_patch_encode(x, vit::PositionEmbedding::zeros(6, 12));
  auto a = x.base().values();
  auto b = seq.base().values();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(ChannelPatchEncode, AddsEmbedding) {
  std::mt19937_64 rng(4);
  nn::Rng init(4);
  const auto pe = vit::PositionEmbedding::create(3, 4, init);
  const QuatTensor x = oracle::random_quat({2, 2, 3}, rng);
  const QuatTensor seq = vit::channel_patch_encode(x, pe);
  const QuatTensor table(pe.table.value());
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < 4; ++p) {
      const Quaternion want = x.get(p * 3 + c) + table.at(c, p);
      const auto g = seq.at(c, p).components(), w = want.components();
      for (int n = 0; n < 4; ++n) EXPECT_DOUBLE_EQ(g[n], w[n]);
    }
}

TEST(ChannelPatchEncode, ShapeMismatchThrows) {
  std::mt19937_64 rng(5);
  EXPECT_THROW(vit::channel_patch_encode(quat_input({7, 7, 32}, rng), vit::PositionEmbedding::zeros(64, 49)),
               DimensionError);
  EXPECT_THROW(vit::channel_patch_encode(quat_input({7, 6, 64}, rng), vit::PositionEmbedding::zeros(64, 49)),
               DimensionError);
}

TEST(InputProject, IdentityWhenWidthMatches) {
  std::mt19937_64 rng(6);
  const Var seq = quat_input({5, 9}, rng);
  const Var out = nn::QFCLayer::identity(9).forward(seq);
  EXPECT_TRUE(out.value().identical(seq.value().cast(DType::F64)) || max_abs_diff(out.value(), seq.value()) == 0.0);
}

TEST(InputProject, ZeroWeightsGiveBias) {
  std::mt19937_64 rng(7);
  auto layer = nn::QFCLayer::zeros(6, 3);
  QuatTensor bias = oracle::random_quat({3}, rng);
  layer.bias.mutable_value() = bias.base();
  const QuatTensor out(layer.forward(quat_input({4, 6}, rng)).value());
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t o = 0; o < 3; ++o) EXPECT_EQ(out.at(t, o), bias.get(o));
}

TEST(InputProject, MatchesBlockOracle) {
  std::mt19937_64 rng(8);
  nn::Rng init(8);
  const auto layer = nn::QFCLayer::create(49, 8, init);
  layer.bias.mutable_value() = oracle::random_quat({8}, rng).base();
  const Var seq = quat_input({3, 49}, rng);
  const QuatTensor bias(layer.bias.value());
  const QuatTensor want = oracle::block_qfc(QuatTensor(seq.value()), QuatTensor(layer.weight.value()), &bias);
  EXPECT_LT(max_abs_diff(layer.forward(seq).value(), want.base()), 1e-10);
}

TEST(InputProject, WidthMismatchThrows) {
  std::mt19937_64 rng(9);
  EXPECT_THROW(nn::QFCLayer::identity(49).forward(quat_input({2, 48}, rng)), DimensionError);
}

TEST(QMHSA, SingleTokenAttentionIsAllOnes) {
  nn::Rng init(10);
  std::mt19937_64 rng(10);
  const auto attn = vit::QMHSA::create(8, 2, init);
  const Var x = quat_input({1, 8}, rng);
  for (const auto& map : attn.attention_maps(QuatTensor(x.value()))) EXPECT_EQ(map.get(0), (Quaternion{1, 1, 1, 1}));

  // A single key gives every component weight 1, so each head emits (1,1,1,1) ⊗ V.
  oracle::QMat concat(1);
  for (const auto& h : attn.heads) {
    const oracle::QMat v = oracle::qfc(qmat(x), h.value);
    for (const auto& q : v[0]) concat[0].push_back(qot::hamilton({1, 1, 1, 1}, q));
  }
  expect_qmat_near(qmat(attn.forward(x)), oracle::qfc(concat, attn.output), 1e-12);
}

TEST(QMHSA, ZeroValuesGiveOutputBias) {
  nn::Rng init(11);
  std::mt19937_64 rng(11);
  const auto attn = vit::QMHSA::create(4, 2, init);
  for (const auto& h : attn.heads) {
    zero_out(h.value.weight);
    zero_out(h.value.bias);
  }
  attn.output.bias.mutable_value() = oracle::random_quat({4}, rng).base();
  const QuatTensor out(attn.forward(quat_input({3, 4}, rng)).value());
  const QuatTensor bias(attn.output.bias.value());
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t e = 0; e < 4; ++e) EXPECT_EQ(out.at(t, e), bias.get(e));
}

TEST(QMHSA, MatchesLoopOracle) {
  nn::Rng init(12);
  std::mt19937_64 rng(12);
  const auto attn = vit::QMHSA::create(8, 2, init);
  for (const auto& h : attn.heads)
    for (const auto* l : {&h.query, &h.key, &h.value}) l->bias.mutable_value() = oracle::random_quat({4}, rng).base();
  const Var x = quat_input({3, 8}, rng);
  expect_qmat_near(qmat(attn.forward(x)), oracle::qmhsa(qmat(x), attn), 1e-10);
}

TEST(QMHSA, MatchesLoopOracleOverSmallConfigs) {
  std::mt19937_64 rng(13);
  for (std::size_t heads : {1u, 2u})
    for (std::size_t e = heads; e <= 8; e += heads)
      for (std::size_t t = 1; t <= 4; ++t)
        for (bool conj : {false, true}) {
          nn::Rng init(100 * t + 10 * e + heads);
          const auto attn = vit::QMHSA::create(e, heads, init, conj);
          const Var x = quat_input({t, e}, rng);
          SCOPED_TRACE(::testing::Message() << "T=" << t << " E=" << e << " heads=" << heads << " conj=" << conj);
          expect_qmat_near(qmat(attn.forward(x)), oracle::qmhsa(qmat(x), attn), 1e-10);
        }
}

TEST(QMHSA, AttentionRowsSumToOne) {
  nn::Rng init(14);
  std::mt19937_64 rng(14);
  const auto attn = vit::QMHSA::create(8, 2, init);
  const QuatTensor x = oracle::random_quat({4, 8}, rng, -3, 3);
  for (const auto& map : attn.attention_maps(x))
    for (std::size_t q = 0; q < 4; ++q) {
      Quaternion total{};
      for (std::size_t k = 0; k < 4; ++k) total = total + map.at(q, k);
      for (double c : total.components()) EXPECT_NEAR(c, 1.0, 1e-6);
    }
}

TEST(QMHSA, PermutationEquivariant) {
  nn::Rng init(15);
  std::mt19937_64 rng(15);
  const auto attn = vit::QMHSA::create(4, 2, init);
  const oracle::QMat x = qmat(quat_input({4, 4}, rng));
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  oracle::QMat px(4);
  for (std::size_t t = 0; t < 4; ++t) px[t] = x[perm[t]];
  const oracle::QMat out = qmat(attn.forward(Var::constant(oracle::from_qmat(x).base())));
  const oracle::QMat pout = qmat(attn.forward(Var::constant(oracle::from_qmat(px).base())));
  oracle::QMat want(4);
  for (std::size_t t = 0; t < 4; ++t) want[t] = out[perm[t]];
  expect_qmat_near(pout, want, 1e-12);
}

TEST(QMHSA, WidthMismatchThrows) {
  nn::Rng init(16);
  std::mt19937_64 rng(16);
  EXPECT_THROW(vit::QMHSA::create(8, 2, init).forward(quat_input({2, 4}, rng)), DimensionError);
}

TEST(QCFFN, IdentityConvsReduceToGelu) {
  nn::Rng init(17);
  std::mt19937_64 rng(17);
  auto ffn = vit::QCFFN::create(3, 3, 2, init);
  ffn.convs[0] = nn::QConvLayer::identity(3);
  ffn.convs[1] = nn::QConvLayer::identity(3);
  // Standardize each token across its 12 reals.
  Tensor x = oracle::random_tensor({2, 3, 4}, rng, -2, 2);
  for (std::size_t t = 0; t < 2; ++t) {
    double mu = 0, var = 0;
    for (std::size_t n = 0; n < 12; ++n) mu += x[t * 12 + n];
    mu /= 12;
    for (std::size_t n = 0; n < 12; ++n) var += (x[t * 12 + n] - mu) * (x[t * 12 + n] - mu);
    var /= 12;
    for (std::size_t n = 0; n < 12; ++n) x.data()[t * 12 + n] = (x[t * 12 + n] - mu) / std::sqrt(var);
  }
  const Tensor out = ffn.forward(Var::constant(x)).value();
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_NEAR(out[n], oracle::gelu(x[n]), 1e-5);
}

TEST(QCFFN, ZeroLastConvGivesZeros) {
  nn::Rng init(18);
  std::mt19937_64 rng(18);
  const auto ffn = vit::QCFFN::create(4, 8, 2, init);
  zero_out(ffn.convs[1].kernel);
  zero_out(ffn.convs[1].bias);
  const Tensor out = ffn.forward(quat_input({3, 4}, rng)).value();
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(QCFFN, MatchesStageOracle) {
  nn::Rng init(19);
  std::mt19937_64 rng(19);
  for (std::size_t m : {2u, 3u}) {
    const auto ffn = vit::QCFFN::create(4, 6, m, init);
    for (const auto& c : ffn.convs) c.bias.mutable_value() = oracle::random_quat({c.bias.shape()[0]}, rng).base();
    for (const auto& n : ffn.norms) {
      n.gamma.mutable_value() = oracle::random_tensor(n.gamma.shape(), rng, 0.5, 1.5);
      n.beta.mutable_value() = oracle::random_tensor(n.beta.shape(), rng);
    }
    const Var x = quat_input({3, 4}, rng);
    expect_qmat_near(qmat(ffn.forward(x)), oracle::qcffn(qmat(x), ffn), 1e-10);
  }
}

TEST(QCFFN, ConvCountAndWidths) {
  nn::Rng init(20);
  const auto ffn = vit::QCFFN::create(8, 16, 2, init);
  ASSERT_EQ(ffn.convs.size(), 2u);
  ASSERT_EQ(ffn.norms.size(), 1u);
  EXPECT_EQ(ffn.convs[0].kernel.shape(), (Shape{1, 1, 8, 16, 4}));
  EXPECT_EQ(ffn.convs[1].kernel.shape(), (Shape{1, 1, 16, 8, 4}));
}

TEST(QViTBlock, ZeroSublayersGiveLayerNorm) {
  auto cfg = tiny_config();
  nn::Rng init(21);
  std::mt19937_64 rng(21);
  const auto blk = vit::QViTBlock::create(cfg, init);
  zero_attention(blk.attention);
  for (const auto& c : blk.ffn.convs) {
    zero_out(c.kernel);
    zero_out(c.bias);
  }
  const Var x = quat_input({2, 4}, rng);
  const Var out = blk.forward(x);
  EXPECT_EQ(out.shape(), x.shape());
  expect_qmat_near(qmat(out), oracle::layer_norm(qmat(x), blk.norm), 1e-12);
}

TEST(QViTBlock, MatchesCompositionOracle) {
  auto cfg = tiny_config();
  nn::Rng init(22);
  std::mt19937_64 rng(22);
  const auto blk = vit::QViTBlock::create(cfg, init);
  blk.norm.beta.mutable_value() = oracle::random_tensor(blk.norm.beta.shape(), rng);
  const Var x = quat_input({2, 4}, rng);
  expect_qmat_near(qmat(blk.forward(x)), oracle::block(qmat(x), blk), 1e-10);
}

TEST(QViTBlock, StackingPreservesShape) {
  auto cfg = tiny_config();
  nn::Rng init(23);
  std::mt19937_64 rng(23);
  Var x = quat_input({2, 4}, rng);
  for (int n = 0; n < 5; ++n) {
    x = vit::QViTBlock::create(cfg, init).forward(x);
    EXPECT_EQ(x.shape(), (Shape{2, 4, 4}));
  }
}

TEST(QViT, DefaultConfigGivesSevenLogits) {
  nn::Rng init(24);
  std::mt19937_64 rng(24);
  const vit::QViT model(vit::QViTConfig{}, init);
  ag::NoGradGuard guard;
  const Var logits = model.forward(quat_input({7, 7, 64}, rng));
  EXPECT_EQ(logits.shape(), (Shape{7}));
  EXPECT_TRUE(logits.value().all_finite());
}

TEST(QViT, SingleClass) {
  auto cfg = tiny_config();
  cfg.num_classes = 1;
  nn::Rng init(25);
  std::mt19937_64 rng(25);
  const vit::QViT model(cfg, init);
  const Var logits = model.forward(quat_input({1, 2, 2}, rng));
  ASSERT_EQ(logits.shape(), (Shape{1}));
  const Tensor p = ag::softmax(logits, 0).value();
  EXPECT_EQ(p[0], 1.0);
}

TEST(QViT, DeterministicForSeed) {
  auto cfg = tiny_config();
  std::mt19937_64 rng(26);
  const QuatTensor x = oracle::random_quat({1, 2, 2}, rng);
  nn::Rng a(77), b(77);
  const vit::QViT m1(cfg, a), m2(cfg, b);
  EXPECT_TRUE(m1.logits(x).identical(m2.logits(x)));
  EXPECT_TRUE(m1.logits(x).identical(m1.logits(x)));
}

TEST(QViT, MatchesComposedOracle) {
  auto cfg = tiny_config();
  cfg.blocks = 2;
  nn::Rng init(27);
  std::mt19937_64 rng(27);
  const vit::QViT model(cfg, init);
  const QuatTensor x = oracle::random_quat({1, 2, 2}, rng);

  oracle::QMat seq(2);
  const QuatTensor pos(model.position.table.value());
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t p = 0; p < 2; ++p) seq[c].push_back(x.get(p * 2 + c) + pos.at(c, p));
  seq = oracle::qfc(seq, model.input_projection);
  for (const auto& blk : model.blocks) seq = oracle::block(seq, blk);
  seq = oracle::layer_norm(seq, model.final_norm);
  oracle::QMat flat(1);
  for (const auto& row : seq) flat[0].insert(flat[0].end(), row.begin(), row.end());
  for (std::size_t l = 0; l < model.mlp.size(); ++l) {
    flat = oracle::qfc(flat, model.mlp[l]);
    if (l + 1 < model.mlp.size()) flat = oracle::gelu(flat);
  }
  std::vector<double> reals;
  for (const auto& q : flat[0])
    for (double c : q.components()) reals.push_back(c);
  const Tensor& w = model.classifier.weight.value();
  const Tensor& b = model.classifier.bias.value();
  const Tensor got = model.logits(x);
  for (std::size_t k = 0; k < cfg.num_classes; ++k) {
    double z = b[k];
    for (std::size_t n = 0; n < reals.size(); ++n) z += reals[n] * w[n * cfg.num_classes + k];
    EXPECT_NEAR(got[k], z, 1e-10);
  }
}

TEST(QViT, InvalidConfigRejected) {
  auto cfg = tiny_config();
  cfg.heads = 3;
  nn::Rng init(28);
  EXPECT_THROW(vit::QViT(cfg, init), ContractError);
  cfg = tiny_config();
  cfg.blocks = 0;
  EXPECT_THROW(vit::QViT(cfg, init), ContractError);
}

TEST(QViT, WrongInputShapeThrows) {
  nn::Rng init(29);
  std::mt19937_64 rng(29);
  const vit::QViT model(tiny_config(), init);
  EXPECT_THROW(model.forward(quat_input({2, 2, 2}, rng)), DimensionError);
}

TEST(QViTGradients, OneBlockOnTwoTokens) {
  const auto cfg = tiny_config();
  nn::Rng init(30);
  std::mt19937_64 rng(30);
  const vit::QViT model(cfg, init);
  const Var x = quat_input({1, 2, 2}, rng);
  const std::vector<int> label{1};
  const auto params = model.parameters();
  certify_block_gradients(
      [&] { return ag::cross_entropy(ag::reshape(model.forward(x), {1, cfg.num_classes}), label); }, params);
}

TEST(QViTGradients, BlockWithFourTokens) {
  auto cfg = tiny_config();
  cfg.embed_dim = 8;
  cfg.ffn_hidden = 6;
  nn::Rng init(31);
  std::mt19937_64 rng(31);
  const auto blk = vit::QViTBlock::create(cfg, init);
  nn::ParamList params;
  blk.collect("block", params);
  const Var x = quat_input({4, 8}, rng);
  const Tensor r = oracle::random_tensor({4, 8, 4}, rng);
  certify_block_gradients([&] { return ag::sum(ag::mul(blk.forward(x), Var::constant(r))); }, params);
}

TEST(QViTParameters, NamesAreUniqueAndCountsClosedForm) {
  const auto cfg = tiny_config();
  nn::Rng init(32);
  const vit::QViT model(cfg, init);
  const auto params = model.parameters();
  std::vector<std::string> names;
  for (const auto& p : params) names.push_back(p.name);
  std::sort(names.begin(), names.end());
  EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());

  const std::size_t C = cfg.channels, P = cfg.token_dim(), E = cfg.embed_dim, d = cfg.head_dim(), h = cfg.heads;
  const std::size_t F = cfg.ffn_hidden, flat = C * E, m = cfg.mlp_width(), K = cfg.num_classes;
  const std::size_t per_block = 4 * (h * 3 * (E * d + d) + (h * d * E + E)) + 2 * 4 * E + 4 * (E * F + F) +
                                2 * 4 * F + 4 * (F * E + E);
  const std::size_t want = 4 * C * P + 4 * (P * E + E) + cfg.blocks * per_block + 2 * 4 * E + 4 * (flat * m + m) +
                           4 * (m * m + m) + (4 * m * K + K);
  EXPECT_EQ(nn::count_reals(params), want);
}

TEST(RealViT, ForwardShapeAndRatio) {
  auto cfg = tiny_config();
  cfg.embed_dim = 8;
  cfg.ffn_hidden = 16;
  cfg.mlp_hidden = 0;
  nn::Rng init(33);
  std::mt19937_64 rng(33);
  const vit::RealViT real(cfg, init);
  const vit::QViT quat(cfg, init);
  EXPECT_EQ(real.forward(Var::constant(oracle::random_tensor({1, 2, 2, 4}, rng))).shape(), (Shape{3}));
  const double ratio = static_cast<double>(nn::count_reals(quat.parameters())) / nn::count_reals(real.parameters());
  EXPECT_GE(ratio, 0.25);
  EXPECT_LE(ratio, 1.0 / 3.0);
}

TEST(QViTGradients, FullModelFourTokensWidthEight) {
  auto cfg = tiny_config();
  cfg.channels = 4;
  cfg.embed_dim = 8;
  cfg.ffn_hidden = 8;
  cfg.mlp_hidden = 4;
  nn::Rng init(34);
  std::mt19937_64 rng(34);
  const vit::QViT model(cfg, init);
  const Var x = quat_input({1, 2, 4}, rng);
  const std::vector<int> label{2};
  certify_block_gradients(
      [&] { return ag::cross_entropy(ag::reshape(model.forward(x), {1, cfg.num_classes}), label); },
      model.parameters());
}
