#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "qot/core/tensor.hpp"
#include "qot/vit/config.hpp"

namespace qot::harness {

struct ModelConfig {
  vit::QViTConfig qvit;
  std::size_t image_channels = 1;
  std::size_t backbone_channels = 32;  // D_f of the toy backbone output
  std::size_t backbone_width = 8;      // channels of the first backbone conv; doubled twice
  /// Inputs are stored backbone feature maps [7 × 7 × backbone_channels]
  /// rather than images; the toy backbone is bypassed.
  bool precomputed_features = false;

  Shape input_shape() const;

  /// The backbone fixes the Q-ViT's spatial extents at 7×7.
  void validate() const;
};

enum class Optim { Adam, Sgd };

struct TrainConfig {
  Optim optimizer = Optim::Adam;
  double lr = 1e-3;
  double momentum = 0.9;  // SGD only
  std::size_t epochs_ortho = 20;
  std::size_t epochs_qvit = 20;
  std::size_t batch_size = 16;
  double lambda = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;

  void validate() const;
};

/// Named presets: "default" (the full-size architecture), "paper" (E = 16, about
/// 8.5M parameters) and "desk" (trains end to end in minutes on one core).
RunConfig preset(std::string_view name);
bool is_preset(std::string_view name);

/// Line-oriented `key = value` text. Blank lines and `#` comments are ignored.
/// An optional leading `preset = NAME` selects the base that later keys override.
/// Throws FormatError (offset = 1-based line number) on unknown keys or bad values.
RunConfig parse_config(std::string_view text);
/// A preset name, or a path to a config file.
RunConfig load_config(const std::string& name_or_path);
/// Every key, one per line; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& c);

}  // namespace qot::harness
