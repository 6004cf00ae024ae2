#include "qot/harness/certify.hpp"

#include <array>
#include <cmath>
#include <map>

#include "qot/autograd/ops.hpp"
#include "qot/nn/functional.hpp"
#include "qot/nn/init.hpp"
#include "qot/ortho/ortho.hpp"
#include "qot/vit/qvit.hpp"

namespace qot::harness {
namespace {

using ag::Var;

constexpr double kOpTol = 1e-4;
constexpr double kModelTol = 1e-3;
constexpr double kZeroGrad = 1e-12;

struct Suite {
  nn::Rng rng{20240601};
  std::vector<CertifiedOp> out;

  Var param(const Shape& s, double lo = -1.0, double hi = 1.0) {
    Tensor t(s);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return Var::parameter(std::move(t));
  }
  Var constant(const Shape& s, double lo = -1.0, double hi = 1.0) {
    Tensor t(s);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return Var::constant(std::move(t));
  }
  /// Σ out ⊙ R with a fixed random R per shape, so every output element matters.
  Var probe(const Var& y) {
    auto it = probes.find(y.shape());
    if (it == probes.end()) it = probes.emplace(y.shape(), constant(y.shape())).first;
    return ag::sum(ag::mul(y, it->second));
  }
  std::map<Shape, Var> probes;

  void check(const std::string& name, const std::function<Var()>& f, const nn::ParamList& params,
             double tol = kOpTol) {
    out.push_back({name, ag::grad_check(f, params, 1e-5, tol)});
  }

  /// grad_check on every parameter except key biases, which must get zero gradient.
  void check_model(const std::string& name, const std::function<Var()>& f, const nn::ParamList& params) {
    nn::ParamList checked, shift_invariant;
    for (const auto& p : params) (p.name.ends_with(".key.bias") ? shift_invariant : checked).push_back(p);
    ag::GradCheckReport report = ag::grad_check(f, checked, 1e-5, kModelTol);
    for (const auto& p : shift_invariant) p.var.zero_grad();
    ag::backward(f());
    for (const auto& p : shift_invariant) {
      double worst = 0.0;
      for (double g : p.var.grad().data()) worst = std::max(worst, std::abs(g));
      report.entries.push_back({p.name, worst, worst < kZeroGrad});
    }
    out.push_back({name, std::move(report)});
  }
};

}  // namespace

std::vector<CertifiedOp> certification_suite() {
  Suite s;
  {
    Var a = s.param({2, 3, 4}), b = s.param({2, 3, 4});
    s.check("add", [&] { return s.probe(ag::add(a, b)); }, {{"a", a}, {"b", b}});
    s.check("sub", [&] { return s.probe(ag::sub(a, b)); }, {{"a", a}, {"b", b}});
    s.check("mul", [&] { return s.probe(ag::mul(a, b)); }, {{"a", a}, {"b", b}});
    s.check("scale", [&] { return s.probe(ag::scale(a, -1.7)); }, {{"a", a}});
    Var c = s.param({3, 4});
    s.check("add_broadcast", [&] { return s.probe(ag::add_broadcast(a, c)); }, {{"x", a}, {"b", c}});
    s.check("sum", [&] { return ag::sum(ag::mul(a, a)); }, {{"a", a}});
    s.check("mean", [&] { return ag::mean(ag::mul(a, b)); }, {{"a", a}, {"b", b}});
    s.check("reshape", [&] { return s.probe(ag::reshape(a, {4, 6})); }, {{"a", a}});
    s.check("transpose01", [&] { return s.probe(ag::transpose01(a)); }, {{"a", a}});
    Var d = s.param({1, 3, 4});
    s.check("concat", [&] { return s.probe(ag::concat(std::array<Var, 2>{a, d}, 0)); }, {{"a", a}, {"d", d}});
    s.check("conjugate", [&] { return s.probe(ag::conjugate(a)); }, {{"a", a}});
    Var r = s.param({2, 3}), i = s.param({2, 3}), j = s.param({2, 3}), k = s.param({2, 3});
    s.check("stack_components", [&] { return s.probe(ag::stack_components(r, i, j, k)); },
            {{"r", r}, {"i", i}, {"j", j}, {"k", k}});
    s.check("build_quaternion", [&] { return s.probe(ortho::build_quaternion(r, i, j)); },
            {{"f1", r}, {"f2", i}, {"f3", j}});
  }
  {
    Var x = s.param({4, 5}, -2, 2);
    s.check("relu", [&] { return s.probe(ag::relu(x)); }, {{"x", x}});
    s.check("gelu", [&] { return s.probe(ag::gelu(x)); }, {{"x", x}});
    Var y = s.param({3, 5, 4}, -2, 2);
    for (std::size_t axis = 0; axis < 3; ++axis)
      s.check("softmax_axis" + std::to_string(axis), [&] { return s.probe(ag::softmax(y, axis)); }, {{"x", y}});
    s.check("component_softmax", [&] { return s.probe(nn::component_softmax(y)); }, {{"x", y}});
    Var g = s.param({5, 4}), b = s.param({5, 4});
    s.check("layer_norm", [&] { return s.probe(ag::layer_norm(y, g, b)); }, {{"x", y}, {"gamma", g}, {"beta", b}});
  }
  {
    Var x = s.param({3, 4}), w = s.param({4, 5}), b = s.param({5}), m = s.param({5, 2});
    s.check("linear", [&] { return s.probe(ag::linear(x, w, b)); }, {{"x", x}, {"w", w}, {"b", b}});
    s.check("matmul", [&] { return s.probe(ag::matmul(x, w)); }, {{"a", x}, {"b", w}});
    Var img = s.param({5, 6, 2}), kern = s.param({3, 3, 2, 3}), kb = s.param({3});
    s.check("conv2d", [&] { return s.probe(ag::conv2d(img, kern, kb, 2, 1)); },
            {{"x", img}, {"kernel", kern}, {"b", kb}});
    s.check("spatial_mean", [&] { return s.probe(ag::spatial_mean(img)); }, {{"x", img}});
    s.check("gap", [&] { return s.probe(nn::gap(img)); }, {{"x", img}});
  }
  {
    Var p = s.param({3, 4}), q = s.param({3, 4});
    s.check("hamilton", [&] { return s.probe(ag::hamilton(p, q)); }, {{"a", p}, {"b", q}});
    Var A = s.param({2, 3, 4}), B = s.param({3, 2, 4});
    s.check("quat_matmul", [&] { return s.probe(ag::quat_matmul(A, B)); }, {{"A", A}, {"B", B}});
    Var x = s.param({3, 2, 4}), w = s.param({2, 5, 4}), b = s.param({5, 4});
    s.check("quat_linear", [&] { return s.probe(ag::quat_linear(x, w, b)); }, {{"x", x}, {"W", w}, {"b", b}});
    Var img = s.param({4, 5, 2, 4}), kern = s.param({3, 2, 2, 3, 4}), kb = s.param({3, 4});
    s.check("quat_conv2d", [&] { return s.probe(ag::quat_conv2d(img, kern, kb, 2, 1)); },
            {{"x", img}, {"kernel", kern}, {"b", kb}});
  }
  {
    Var z = s.param({4, 7}, -2, 2);
    const std::vector<int> labels{0, 3, 6, 3};
    s.check("cross_entropy", [&] { return ag::cross_entropy(z, labels); }, {{"logits", z}});
    Var v1 = s.param({6}), v2 = s.param({6}), v3 = s.param({6});
    s.check("orthogonal_loss", [&] { return ag::orthogonal_loss(v1, v2, v3); }, {{"v1", v1}, {"v2", v2}, {"v3", v3}});
    nn::QFCLayer fc = nn::QFCLayer::create(3, 5, s.rng);
    fc.bias = s.param({5, 4});
    Var x = s.constant({2, 3, 4});
    const std::vector<int> rows{1, 4};
    nn::ParamList params;
    fc.collect("qfc", params);
    s.check("qfc_component_softmax_cross_entropy",
            [&] { return ag::cross_entropy(ag::reshape(nn::component_softmax(fc.forward(x)), {2, 20}), rows); },
            params);
  }
  {
    vit::QViTConfig cfg;
    cfg.height = 1;
    cfg.width = 2;
    cfg.channels = 4;
    cfg.embed_dim = 8;
    cfg.heads = 2;
    cfg.blocks = 1;
    cfg.ffn_hidden = 8;
    cfg.mlp_layers = 2;
    cfg.mlp_hidden = 4;
    cfg.num_classes = 3;
    const auto block = vit::QViTBlock::create(cfg, s.rng);
    nn::ParamList block_params;
    block.collect("block", block_params);
    Var x = s.constant({4, 8, 4});
    Var r = s.constant({4, 8, 4});
    s.check_model("qvit_block_T4_E8_heads2", [&] { return ag::sum(ag::mul(block.forward(x), r)); }, block_params);

    const vit::QViT model(cfg, s.rng);
    Var q = s.constant({1, 2, 4, 4});
    const std::vector<int> label{2};
    s.check_model("qvit_forward_T4_E8",
                  [&] { return ag::cross_entropy(ag::reshape(model.forward(q), {1, cfg.num_classes}), label); },
                  model.parameters());
  }
  return s.out;
}

}  // namespace qot::harness
