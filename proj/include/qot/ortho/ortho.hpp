#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qot/core/quat_tensor.hpp"
#include "qot/nn/functional.hpp"
#include "qot/nn/layers.hpp"

namespace qot::ortho {

inline constexpr std::size_t kBranches = 3;
inline constexpr std::size_t kImageSize = 56;
inline constexpr std::size_t kFeatureSize = 7;

/// Small real CNN mapping a [56 × 56 × ch] image to a [7 × 7 × D_f] feature map.
/// Four 3×3 conv + ReLU blocks; the first keeps resolution, the other three halve it.
struct ToyBackbone {
  std::vector<nn::Conv2d> convs;

  static ToyBackbone create(std::size_t in_channels, std::size_t feature_channels, nn::Rng& rng,
                            std::size_t base_width = 8);
  std::size_t in_channels() const { return convs.front().kernel.shape()[2]; }
  std::size_t feature_channels() const { return convs.back().kernel.shape()[3]; }

  ag::Var forward(const ag::Var& image) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;
};

/// Three independent 1×1 convolutions D_f → C plus the auxiliary classifier
/// over the concatenated pooled branch vectors (3·C → K).
struct OrthoHead {
  std::array<nn::Conv2d, kBranches> branches;
  nn::Linear aux;

  static OrthoHead create(std::size_t feature_channels, std::size_t channels, std::size_t classes, nn::Rng& rng);
  std::size_t in_channels() const { return branches[0].kernel.shape()[2]; }
  std::size_t channels() const { return branches[0].kernel.shape()[3]; }

  void collect(const std::string& prefix, nn::ParamList& out) const;
};

struct Decomposition {
  std::array<ag::Var, kBranches> maps;    // U_i [H × W × C]
  std::array<ag::Var, kBranches> pooled;  // gap(U_i) [C]
  std::array<ag::Var, kBranches> probs;   // v_i = softmax(gap(U_i)) [C]
};

/// F [H × W × D_f] → U_i, gap(U_i), v_i.
Decomposition decompose(const ag::Var& features, const OrthoHead& head);

/// Q = (f1+f2+f3)/3 + f1·i + f2·j + f3·k elementwise; result [... × 4].
ag::Var build_quaternion(const ag::Var& f1, const ag::Var& f2, const ag::Var& f3);
QuatTensor build_quaternion(const Tensor& f1, const Tensor& f2, const Tensor& f3);

struct FinetuneTerms {
  ag::Var total, ce, ortho;
  ag::Var logits;  // auxiliary head, [B × K]
};

/// ce = cross-entropy of the auxiliary head on [gap(U_1) | gap(U_2) | gap(U_3)];
/// ortho = batch mean of the orthogonal loss over (v_1, v_2, v_3);
/// total = ce + λ·ortho.
FinetuneTerms finetune_loss(std::span<const ag::Var> features, std::span<const int> labels, const OrthoHead& head,
                            const nn::LossWeights& w);

struct FinetuneResult {
  double loss = 0.0, ce = 0.0, ortho = 0.0;
};

/// Backbone + head forward on a batch of images, then backward from the total
/// loss. Gradients accumulate into the parameters; stepping is the caller's job.
FinetuneResult finetune_step(std::span<const ag::Var> images, std::span<const int> labels,
                             const ToyBackbone& backbone, const OrthoHead& head, const nn::LossWeights& w);

/// Mean pairwise |cos| between the branch vectors for one feature map.
double mean_abs_cosine(const ag::Var& features, const OrthoHead& head);

/// Backbone features → decomposition → quaternion map [H × W × C × 4].
QuatTensor features_to_quaternion(const Tensor& features, const OrthoHead& head);
/// image → backbone → features_to_quaternion.
QuatTensor extract_pipeline(const Tensor& image, const ToyBackbone& backbone, const OrthoHead& head);
Tensor backbone_features(const Tensor& image, const ToyBackbone& backbone);

}  // namespace qot::ortho
