#include "qot/harness/accounting.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "qot/core/error.hpp"

namespace qot::harness {

std::string flops::convention() {
  return "FLOP convention: real MAC = 2; Hamilton product = 28 (16 mul + 12 add); quaternion add = 4; "
         "QFC D_in→D_out per token = 28·D_in·D_out + 4·(D_in−1)·D_out + 4·D_out; real FC = 2·In·Out; "
         "softmax = 5/element; GELU = 5/element; LayerNorm over n = 7n+4; residual/embedding add and score "
         "scaling = 1/element";
}

std::uint64_t CostReport::total_params() const {
  return std::accumulate(layers.begin(), layers.end(), std::uint64_t{0},
                         [](std::uint64_t s, const CostEntry& e) { return s + e.params; });
}

std::uint64_t CostReport::total_flops() const {
  return std::accumulate(layers.begin(), layers.end(), std::uint64_t{0},
                         [](std::uint64_t s, const CostEntry& e) { return s + e.flops; });
}

std::uint64_t CostReport::params_of(const std::string& layer) const {
  for (const auto& e : layers)
    if (e.layer == layer) return e.params;
  return 0;
}

std::string CostReport::summary_line() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s\tparams=%.2fM\tflops=%.2fM", model.c_str(), total_params() / 1e6,
                total_flops() / 1e6);
  return buf;
}

std::string CostReport::to_text() const {
  std::ostringstream os;
  os << "layer\tparams\tflops\n";
  for (const auto& e : layers) os << e.layer << '\t' << e.params << '\t' << e.flops << '\n';
  os << "total\t" << total_params() << '\t' << total_flops() << '\n';
  os << summary_line() << '\n' << flops::convention() << '\n';
  return os.str();
}

namespace {

using u64 = std::uint64_t;

CostReport quaternion_costs(const vit::QViTConfig& cfg) {
  const u64 T = cfg.tokens(), P = cfg.token_dim(), E = cfg.embed_dim, d = cfg.head_dim(), H = cfg.heads;
  const u64 F = cfg.ffn_hidden, flat = cfg.flat_width(), m = cfg.mlp_width(), K = cfg.num_classes;
  CostReport r{"qvit", {}};
  auto add = [&](std::string name, u64 params, u64 f) { r.layers.push_back({std::move(name), params, f}); };

  add("qvit.position", 4 * T * P, flops::kElementwise * 4 * T * P);
  add("qvit.input_projection", 4 * (P * E + E), T * flops::qfc(P, E));
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    const std::string p = "qvit.block" + std::to_string(b);
    for (std::size_t h = 0; h < H; ++h) {
      const std::string hp = p + ".attn.head" + std::to_string(h);
      for (const char* proj : {".query", ".key", ".value"}) add(hp + proj, 4 * (E * d + d), T * flops::qfc(E, d));
      const u64 scores = T * T * (flops::kHamilton * d + flops::kQuatAdd * (d - 1)) + flops::kElementwise * 4 * T * T;
      add(hp + ".scores", 0, scores);
      add(hp + ".softmax", 0, flops::kSoftmax * 4 * T * T);
      add(hp + ".weighted_values", 0, T * d * (flops::kHamilton * T + flops::kQuatAdd * (T - 1)));
    }
    add(p + ".attn.output", 4 * (H * d * E + E), T * flops::qfc(H * d, E));
    add(p + ".attn.residual", 0, flops::kElementwise * 4 * T * E);
    add(p + ".norm", 2 * 4 * E, T * flops::layer_norm(4 * E));
    for (std::size_t c = 0; c < cfg.ffn_convs; ++c) {
      const u64 in = c == 0 ? E : F, out = c + 1 == cfg.ffn_convs ? E : F;
      add(p + ".ffn.conv" + std::to_string(c), 4 * (in * out + out), T * flops::qfc(in, out));
      if (c + 1 < cfg.ffn_convs) {
        add(p + ".ffn.norm" + std::to_string(c), 2 * 4 * out, T * flops::layer_norm(4 * out));
        add(p + ".ffn.gelu" + std::to_string(c), 0, flops::kGelu * 4 * T * out);
      }
    }
    add(p + ".ffn.residual", 0, flops::kElementwise * 4 * T * E);
  }
  add("qvit.final_norm", 2 * 4 * E, T * flops::layer_norm(4 * E));
  for (std::size_t l = 0; l < cfg.mlp_layers; ++l) {
    const u64 in = l == 0 ? flat : m;
    if (l > 0) add("qvit.mlp_gelu" + std::to_string(l), 0, flops::kGelu * 4 * in);
    add("qvit.mlp" + std::to_string(l), 4 * (in * m + m), flops::qfc(in, m));
  }
  add("qvit.classifier", 4 * m * K + K, flops::fc(4 * m, K));
  return r;
}

CostReport real_costs(const vit::QViTConfig& cfg) {
  const u64 T = cfg.tokens(), P = 4 * cfg.token_dim(), E = 4 * cfg.embed_dim, d = 4 * cfg.head_dim(), H = cfg.heads;
  const u64 F = 4 * cfg.ffn_hidden, flat = 4 * cfg.flat_width(), m = 4 * cfg.mlp_width(), K = cfg.num_classes;
  CostReport r{"rvit", {}};
  auto add = [&](std::string name, u64 params, u64 f) { r.layers.push_back({std::move(name), params, f}); };
  auto fc = [](u64 in, u64 out) { return in * out + out; };

  add("rvit.position", T * P, flops::kElementwise * T * P);
  add("rvit.input_projection", fc(P, E), T * flops::fc(P, E));
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    const std::string p = "rvit.block" + std::to_string(b);
    for (std::size_t h = 0; h < H; ++h) {
      const std::string hp = p + ".attn.head" + std::to_string(h);
      for (const char* proj : {".query", ".key", ".value"}) add(hp + proj, fc(E, d), T * flops::fc(E, d));
      add(hp + ".scores", 0, T * T * flops::fc(d, 1, false) + flops::kElementwise * T * T);
      add(hp + ".softmax", 0, flops::kSoftmax * T * T);
      add(hp + ".weighted_values", 0, T * d * flops::fc(T, 1, false));
    }
    add(p + ".attn.output", fc(H * d, E), T * flops::fc(H * d, E));
    add(p + ".attn.residual", 0, flops::kElementwise * T * E);
    add(p + ".norm", 2 * E, T * flops::layer_norm(E));
    for (std::size_t c = 0; c < cfg.ffn_convs; ++c) {
      const u64 in = c == 0 ? E : F, out = c + 1 == cfg.ffn_convs ? E : F;
      add(p + ".ffn.conv" + std::to_string(c), fc(in, out), T * flops::fc(in, out));
      if (c + 1 < cfg.ffn_convs) {
        add(p + ".ffn.norm" + std::to_string(c), 2 * out, T * flops::layer_norm(out));
        add(p + ".ffn.gelu" + std::to_string(c), 0, flops::kGelu * T * out);
      }
    }
    add(p + ".ffn.residual", 0, flops::kElementwise * T * E);
  }
  add("rvit.final_norm", 2 * E, T * flops::layer_norm(E));
  for (std::size_t l = 0; l < cfg.mlp_layers; ++l) {
    const u64 in = l == 0 ? flat : m;
    if (l > 0) add("rvit.mlp_gelu" + std::to_string(l), 0, flops::kGelu * in);
    add("rvit.mlp" + std::to_string(l), fc(in, m), flops::fc(in, m));
  }
  add("rvit.classifier", fc(m, K), flops::fc(m, K));
  return r;
}

}  // namespace

CostReport cost_report(const vit::QViTConfig& cfg, ModelKind kind) {
  cfg.validate();
  return kind == ModelKind::Quaternion ? quaternion_costs(cfg) : real_costs(cfg);
}

CostReport count_flops(const vit::QViTConfig& cfg, const Shape& input, ModelKind kind) {
  const Shape expected{cfg.height, cfg.width, cfg.channels, 4};
  if (input != expected)
    throw DimensionError("input " + to_string(input) + " does not match config " + to_string(expected));
  return cost_report(cfg, kind);
}

CostReport count_params(const nn::ParamList& params, const std::string& model) {
  CostReport r{model, {}};
  for (const auto& p : params) {
    std::string layer = p.name;
    const auto dot = layer.rfind('.');
    if (dot != std::string::npos) {
      const std::string leaf = layer.substr(dot + 1);
      if (leaf == "weight" || leaf == "bias" || leaf == "kernel" || leaf == "gamma" || leaf == "beta")
        layer.resize(dot);
    }
    if (r.layers.empty() || r.layers.back().layer != layer) r.layers.push_back({layer, 0, 0});
    r.layers.back().params += p.var.value().size();
  }
  return r;
}

}  // namespace qot::harness
