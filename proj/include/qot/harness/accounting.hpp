#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qot/nn/layers.hpp"
#include "qot/vit/config.hpp"

namespace qot::harness {

/// FLOP costs used by every count. Totals are comparable across models built
/// here; against figures counted some other way they agree only in magnitude.
namespace flops {
inline constexpr std::uint64_t kMac = 2;         // one real multiply-accumulate
inline constexpr std::uint64_t kHamilton = 28;   // 16 multiplies + 12 adds
inline constexpr std::uint64_t kQuatAdd = 4;
inline constexpr std::uint64_t kSoftmax = 5;     // max, sub, exp, sum, div per element
inline constexpr std::uint64_t kGelu = 5;        // x/√2, erf, +1, ·x, ·½ per element
inline constexpr std::uint64_t kElementwise = 1; // residual / embedding add, score scaling
/// LayerNorm over n reals: sum (n), centre (n), square (n), sum (n), divide by
/// the deviation (n), γ (n), β (n); mean and variance divisions, eps, sqrt (4).
inline std::uint64_t layer_norm(std::uint64_t n) { return 7 * n + 4; }
/// Quaternion FC on one token: D_in·D_out Hamilton products, (D_in−1)·D_out
/// quaternion adds, plus D_out bias adds.
inline std::uint64_t qfc(std::uint64_t in, std::uint64_t out, bool bias = true) {
  return kHamilton * in * out + kQuatAdd * (in - 1) * out + (bias ? kQuatAdd * out : 0);
}
/// Real FC on one row: In·Out multiplies, (In−1)·Out adds, Out bias adds.
inline std::uint64_t fc(std::uint64_t in, std::uint64_t out, bool bias = true) {
  return in * out + (in - 1) * out + (bias ? out : 0);
}
std::string convention();
}  // namespace flops

struct CostEntry {
  std::string layer;
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
};

struct CostReport {
  std::string model;
  std::vector<CostEntry> layers;

  std::uint64_t total_params() const;
  std::uint64_t total_flops() const;
  /// Params of the named layer (0 when absent).
  std::uint64_t params_of(const std::string& layer) const;
  /// Per-layer table, totals and the FLOP convention.
  std::string to_text() const;
  /// `model  params=…M  flops=…M`
  std::string summary_line() const;
};

enum class ModelKind { Quaternion, Real };

/// Closed-form costs of a single forward pass for the given config, without
/// allocating the model.
CostReport cost_report(const vit::QViTConfig& cfg, ModelKind kind = ModelKind::Quaternion);
/// As cost_report, after checking that `input` is the [H × W × C × 4] the config expects.
CostReport count_flops(const vit::QViTConfig& cfg, const Shape& input, ModelKind kind = ModelKind::Quaternion);
/// Real scalars of an instantiated model, grouped by layer (the parameter name
/// without its trailing .weight/.bias/.kernel/.gamma/.beta); FLOPs are zero.
CostReport count_params(const nn::ParamList& params, const std::string& model);

}  // namespace qot::harness
