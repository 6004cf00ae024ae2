#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qot/autograd/grad_check.hpp"
#include "qot/core/error.hpp"
#include "qot/nn/functional.hpp"

using namespace qot;
using namespace qot::nn;

namespace {

QFCLayer random_qfc(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  QFCLayer layer = QFCLayer::zeros(in, out);
  layer.weight.mutable_value() = oracle::random_tensor({in, out, 4}, rng);
  layer.bias.mutable_value() = oracle::random_tensor({out, 4}, rng);
  return layer;
}

/// Direct loop over output pixels, taps and channels with scalar Hamilton products.
QuatTensor naive_qconv(const QuatTensor& x, const QuatTensor& k, const QuatTensor& b, std::size_t stride,
                       std::size_t pad) {
  const auto xs = x.logical_shape();
  const auto ks = k.logical_shape();
  const std::size_t OH = (xs[0] + 2 * pad - ks[0]) / stride + 1, OW = (xs[1] + 2 * pad - ks[1]) / stride + 1;
  QuatTensor out = QuatTensor::zeros({OH, OW, ks[3]});
  for (std::size_t oy = 0; oy < OH; ++oy)
    for (std::size_t ox = 0; ox < OW; ++ox)
      for (std::size_t o = 0; o < ks[3]; ++o) {
        Quaternion acc = b.get(o);
        for (std::size_t u = 0; u < ks[0]; ++u)
          for (std::size_t v = 0; v < ks[1]; ++v)
            for (std::size_t c = 0; c < ks[2]; ++c) {
              const long iy = static_cast<long>(oy * stride + u) - static_cast<long>(pad);
              const long ix = static_cast<long>(ox * stride + v) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(xs[0]) || ix >= static_cast<long>(xs[1])) continue;
              const Quaternion w = k.get(((u * ks[1] + v) * ks[2] + c) * ks[3] + o);
              const Quaternion in = x.get((static_cast<std::size_t>(iy) * xs[1] + static_cast<std::size_t>(ix)) * xs[2] + c);
              acc = acc + hamilton(w, in);
            }
        out.set((oy * OW + ox) * ks[3] + o, acc);
      }
  return out;
}

}  // namespace

TEST(QFC, IdentityWeightsPassInputThrough) {
  std::mt19937_64 rng(1);
  const QuatTensor x = oracle::random_quat({3, 5}, rng);
  EXPECT_TRUE(qfc_forward(x, QFCLayer::identity(5)).base().identical(x.base()));
}

TEST(QFC, SingleElementReducesToHamilton) {
  std::mt19937_64 rng(2);
  const QFCLayer layer = random_qfc(1, 1, rng);
  const QuatTensor x = oracle::random_quat({1, 1}, rng);
  const Quaternion w = QuatTensor(layer.weight.value()).get(0);
  const Quaternion b = QuatTensor(layer.bias.value()).get(0);
  const Quaternion expected = hamilton(w, x.get(0)) + b;
  const Quaternion got = qfc_forward(x, layer).get(0);
  EXPECT_NEAR(got.r, expected.r, 1e-15);
  EXPECT_NEAR(got.i, expected.i, 1e-15);
  EXPECT_NEAR(got.j, expected.j, 1e-15);
  EXPECT_NEAR(got.k, expected.k, 1e-15);
}

TEST(QFC, MatchesBlockMatrixOracle) {
  std::mt19937_64 rng(3);
  const QFCLayer layer = random_qfc(2, 5, rng);
  const QuatTensor x = oracle::random_quat({3, 2}, rng);
  const QuatTensor bias(layer.bias.value());
  const QuatTensor expected = oracle::block_qfc(x, QuatTensor(layer.weight.value()), &bias);
  EXPECT_LT(max_abs_diff(qfc_forward(x, layer).base(), expected.base()), 1e-10);
}

TEST(QFC, ParameterCountIsQuarterOfRealWeights) {
  Rng rng(1);
  for (auto [in, out] : {std::pair{1, 1}, {3, 7}, {49, 64}}) {
    ParamList params;
    QFCLayer::create(in, out, rng).collect("q", params);
    EXPECT_EQ(count_reals(params), std::size_t(4 * in * out + 4 * out));
    ParamList real;
    Linear::create(4 * in, 4 * out, rng).collect("r", real);
    EXPECT_EQ(4 * params[0].var.value().size(), real[0].var.value().size());
  }
}

TEST(QFC, DimensionMismatch) {
  std::mt19937_64 rng(4);
  EXPECT_THROW(qfc_forward(oracle::random_quat({2, 3}, rng), QFCLayer::identity(4)), DimensionError);
}

TEST(QConv, PointwiseEqualsQFC) {
  std::mt19937_64 rng(5);
  const QFCLayer fc = random_qfc(3, 4, rng);
  QConvLayer conv = QConvLayer::zeros(1, 1, 3, 4);
  conv.kernel.mutable_value() = fc.weight.value().reshape({1, 1, 3, 4, 4});
  conv.bias.mutable_value() = fc.bias.value();
  const QuatTensor x = oracle::random_quat({2, 5, 3}, rng);
  const QuatTensor via_conv = qconv_forward(x, conv);
  const QuatTensor via_fc = qfc_forward(x.reshape({10, 3}), fc);
  EXPECT_LT(max_abs_diff(via_conv.base().reshape({10, 4, 4}), via_fc.base()), 1e-12);
}

TEST(QConv, IdentityKernel) {
  std::mt19937_64 rng(6);
  const QuatTensor x = oracle::random_quat({3, 3, 4}, rng);
  EXPECT_TRUE(qconv_forward(x, QConvLayer::identity(4)).base().identical(x.base()));
}

TEST(QConv, MatchesNaiveLoopOracle) {
  std::mt19937_64 rng(7);
  const QuatTensor x = oracle::random_quat({5, 5, 2}, rng);
  for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 0}, {2, 1}, {1, 1}}) {
    QConvLayer conv = QConvLayer::zeros(3, 3, 2, 3);
    conv.kernel.mutable_value() = oracle::random_tensor({3, 3, 2, 3, 4}, rng);
    conv.bias.mutable_value() = oracle::random_tensor({3, 4}, rng);
    conv.stride = stride;
    conv.padding = pad;
    const QuatTensor expected =
        naive_qconv(x, QuatTensor(conv.kernel.value()), QuatTensor(conv.bias.value()), stride, pad);
    EXPECT_LT(max_abs_diff(qconv_forward(x, conv).base(), expected.base()), 1e-10);
  }
}

TEST(QConv, ParameterCountClosedForm) {
  Rng rng(2);
  ParamList params;
  QConvLayer::create(3, 2, 5, 6, rng).collect("c", params);
  EXPECT_EQ(count_reals(params), std::size_t(4 * 3 * 2 * 5 * 6 + 4 * 6));
  EXPECT_THROW(qconv_forward(QuatTensor::zeros({2, 2, 5}), QConvLayer::create(3, 3, 5, 1, rng)), DimensionError);
}

TEST(ComponentSoftmax, UniformOnEqualInput) {
  const QuatTensor x(Tensor::full({2, 5, 4}, 0.7));
  const QuatTensor y = component_softmax(x);
  for (double v : y.base().data()) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(ComponentSoftmax, RealPartIsOrdinarySoftmaxWhenImaginaryIsZero) {
  QuatTensor x = QuatTensor::zeros({4});
  const std::vector<double> real{0.5, -1.0, 2.0, 0.1};
  for (std::size_t t = 0; t < 4; ++t) x.set(t, {real[t], 0, 0, 0});
  const QuatTensor y = component_softmax(x);
  const auto expected = oracle::softmax(real);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_NEAR(y.get(t).r, expected[t], 1e-15);
    EXPECT_EQ(y.get(t).i, 0.25);
    EXPECT_EQ(y.get(t).j, 0.25);
    EXPECT_EQ(y.get(t).k, 0.25);
  }
}

TEST(ComponentSoftmax, MatchesScalarOracleAndNormalises) {
  std::mt19937_64 rng(8);
  const QuatTensor x = oracle::random_quat({3, 6}, rng, -4, 4);
  const QuatTensor y = component_softmax(x);
  for (std::size_t row = 0; row < 3; ++row)
    for (int c = 0; c < 4; ++c) {
      std::vector<double> z(6);
      for (std::size_t t = 0; t < 6; ++t) z[t] = x.base()[4 * (row * 6 + t) + c];
      const auto expected = oracle::softmax(z);
      double total = 0.0;
      for (std::size_t t = 0; t < 6; ++t) {
        const double v = y.base()[4 * (row * 6 + t) + c];
        EXPECT_NEAR(v, expected[t], 1e-12);
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(LayerNorm, ConstantInputGoesToZero) {
  const QuatTensor x(Tensor::full({3, 2, 4}, 5.0));
  const QuatTensor y = layer_norm(x, Tensor::full({2, 4}, 1.0), Tensor({2, 4}));
  for (double v : y.base().data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, NormalisesAllComponentsOfATokenJointly) {
  std::mt19937_64 rng(9);
  const QuatTensor x = oracle::random_quat({4, 6}, rng, -3, 5);
  const QuatTensor y = layer_norm(x, Tensor::full({6, 4}, 1.0), Tensor({6, 4}));
  for (std::size_t t = 0; t < 4; ++t) {
    double mean = 0.0, var = 0.0;
    for (std::size_t n = 0; n < 24; ++n) mean += y.base()[t * 24 + n];
    mean /= 24;
    for (std::size_t n = 0; n < 24; ++n) var += std::pow(y.base()[t * 24 + n] - mean, 2);
    var /= 24;
    EXPECT_NEAR(mean, 0.0, 1e-6);
    EXPECT_NEAR(var, 1.0, 1e-4);  // eps = 1e-5 shrinks the variance slightly
  }
}

TEST(LayerNorm, ZeroGammaGivesBeta) {
  std::mt19937_64 rng(10);
  const QuatTensor x = oracle::random_quat({3, 2}, rng);
  const Tensor beta = oracle::random_tensor({2, 4}, rng);
  const QuatTensor y = layer_norm(x, Tensor({2, 4}), beta);
  for (std::size_t n = 0; n < y.base().size(); ++n) EXPECT_EQ(y.base()[n], beta[n % 8]);
}

TEST(Gelu, KnownValues) {
  QuatTensor x = QuatTensor::zeros({1});
  x.set(0, {0.0, 10.0, 1.0, -1.0});
  const Quaternion y = gelu(x).get(0);
  EXPECT_EQ(y.r, 0.0);
  EXPECT_NEAR(y.i, 10.0, 1e-6);
  // 1·Φ(1) from an independent erf series, and its frozen 6-digit value.
  EXPECT_NEAR(y.j, oracle::gelu(1.0), 1e-12);
  EXPECT_NEAR(y.j, 0.841345, 1e-6);
  EXPECT_NEAR(y.k, oracle::gelu(-1.0), 1e-12);
}

TEST(Gap, Values) {
  EXPECT_EQ(gap(Tensor::full({7, 7, 3}, 2.5)).values(), (std::vector<double>{2.5, 2.5, 2.5}));
  std::mt19937_64 rng(11);
  const Tensor one = oracle::random_tensor({1, 1, 5}, rng);
  EXPECT_EQ(gap(one).values(), one.values());
  const Tensor x = oracle::random_tensor({7, 7, 64}, rng);
  const Tensor g = gap(x);
  for (std::size_t c = 0; c < 64; ++c) {
    double s = 0.0;
    for (std::size_t p = 0; p < 49; ++p) s += x[p * 64 + c];
    EXPECT_NEAR(g[c], s / 49.0, 1e-12);
  }
}

TEST(OrthogonalLoss, AxisVectorsAndIdenticalVectors) {
  const Tensor e1({3}, {1, 0, 0}), e2({3}, {0, 1, 0}), e3({3}, {0, 0, 1});
  EXPECT_EQ(orthogonal_loss(e1, e2, e3), 0.0);
  const Tensor v({3}, {0.3, -2.0, 1.5});
  EXPECT_NEAR(orthogonal_loss(v, v, v), 1.0, 1e-15);
  EXPECT_EQ(kOrthoPairCount, 3);
}

TEST(OrthogonalLoss, MatchesCosineOracleAndIsScaleInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor a = oracle::random_tensor({16}, rng), b = oracle::random_tensor({16}, rng),
                 c = oracle::random_tensor({16}, rng);
    const double expected = (std::abs(oracle::cosine(a.values(), b.values())) +
                             std::abs(oracle::cosine(a.values(), c.values())) +
                             std::abs(oracle::cosine(b.values(), c.values()))) / 3.0;
    const double got = orthogonal_loss(a, b, c);
    EXPECT_NEAR(got, expected, 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
    EXPECT_NEAR(orthogonal_loss(scale(a, pos(rng)), scale(b, pos(rng)), scale(c, pos(rng))), got, 1e-12);
  }
}

TEST(OrthogonalLoss, ZeroVectorIsDegenerate) {
  const Tensor z({3}), v({3}, {1, 2, 3});
  EXPECT_THROW(orthogonal_loss(v, z, v), DegenerateInputError);
  EXPECT_THROW(orthogonal_loss(v, v, Tensor({4}, {1, 1, 1, 1})), DimensionError);
}

TEST(CrossEntropy, AnalyticCases) {
  const std::vector<int> label{3};
  EXPECT_NEAR(cross_entropy(Tensor::full({1, 7}, 0.4), label), std::log(7.0), 1e-12);
  EXPECT_NEAR(std::log(7.0), 1.945910, 1e-6);
  Tensor hot({1, 7});
  hot[3] = 1000.0;
  EXPECT_NEAR(cross_entropy(hot, label), 0.0, 1e-12);
  EXPECT_THROW(cross_entropy(hot, std::vector<int>{7}), ContractError);
  EXPECT_THROW(cross_entropy(hot, std::vector<int>{-1}), ContractError);
}

TEST(CrossEntropy, MatchesNaiveOracle) {
  std::mt19937_64 rng(13);
  const Tensor z = oracle::random_tensor({5, 7}, rng, -3, 3);
  const std::vector<int> labels{0, 6, 2, 2, 4};
  double expected = 0.0;
  for (std::size_t r = 0; r < 5; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 7; ++c) total += std::exp(z[r * 7 + c]);
    expected -= std::log(std::exp(z[r * 7 + labels[r]]) / total);
  }
  EXPECT_NEAR(cross_entropy(z, labels), expected / 5, 1e-9);
}

TEST(CombinedLoss, Arithmetic) {
  EXPECT_EQ(combined_loss(1.7, 0.4, {0.0}), 1.7);
  EXPECT_EQ(combined_loss(0.0, 0.4, {1.0}), 0.4);
  EXPECT_NEAR(combined_loss(2.0, 0.5, {0.1}), 2.05, 1e-15);
  EXPECT_THROW(combined_loss(1.0, 1.0, {-0.5}), ContractError);
  EXPECT_THROW(combined_loss(1.0, 1.0, {std::nan("")}), ContractError);
}

TEST(LayerGradients, QfcSoftmaxCrossEntropyComposite) {
  Rng rng(3);
  const QFCLayer layer = QFCLayer::create(3, 5, rng);
  std::mt19937_64 gen(14);
  const ag::Var x = ag::Var::constant(oracle::random_tensor({2, 3, 4}, gen));
  const std::vector<int> labels{1, 4, 0, 2};
  auto f = [&] {
    ag::Var s = component_softmax(layer.forward(x));                  // [2 × 5 × 4]
    ag::Var logits = ag::reshape(ag::transpose01(ag::reshape(s, {10, 4})), {4, 10});
    return ag::cross_entropy(logits, labels);
  };
  ParamList params;
  layer.collect("qfc", params);
  const auto report = ag::grad_check(f, params, 1e-5, 1e-4);
  EXPECT_TRUE(report.passed()) << report.to_text();
}

TEST(LayerGradients, QConvAndLayerNormAndGap) {
  Rng rng(4);
  const QConvLayer conv = QConvLayer::create(3, 3, 2, 3, rng, 1, 1);
  const LayerNorm norm = LayerNorm::create({3, 4});
  std::mt19937_64 gen(15);
  const ag::Var x = ag::Var::constant(oracle::random_tensor({4, 4, 2, 4}, gen));
  const ag::Var w = ag::Var::constant(oracle::random_tensor({12}, gen));
  auto f = [&] {
    ag::Var y = ag::gelu(norm.forward(conv.forward(x)));              // [4 × 4 × 3 × 4]
    ag::Var pooled = gap(ag::reshape(y, {4, 4, 12}));
    return ag::sum(ag::mul(pooled, w));
  };
  ParamList params;
  conv.collect("conv", params);
  norm.collect("norm", params);
  const auto report = ag::grad_check(f, params, 1e-5, 1e-4);
  EXPECT_TRUE(report.passed()) << report.to_text();
}
