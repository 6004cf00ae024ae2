#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qot/core/tensor.hpp"

namespace qot::harness {

struct Sample {
  std::filesystem::path path;  // relative to the manifest's directory
  int label = 0;
};

/// Lines `relative/path<TAB>label`. Blank lines are skipped. FormatError
/// offsets are 1-based line numbers.
std::vector<Sample> parse_manifest(std::string_view text);
std::string format_manifest(const std::vector<Sample>& samples);

struct Dataset {
  std::vector<Tensor> images;
  std::vector<int> labels;
  std::size_t size() const { return labels.size(); }
};

/// Parse, check every label is in [0, num_classes), and load every image,
/// checking it has shape `image_shape`. An empty manifest is a ContractError.
Dataset load_dataset(const std::filesystem::path& manifest, std::size_t num_classes, const Shape& image_shape);

struct SynthSpec {
  std::size_t num_classes = 7;
  std::size_t per_class = 100;
  std::uint64_t seed = 0;
  double noise = 0.1;
};

/// One 56×56×1 image of class k: a Gaussian blob whose centre and width depend
/// on k (centres on a ring, widths cycling through three values), jittered by
/// up to 2 px, plus N(0, noise²) pixel noise.
Tensor synth_image(std::size_t k, std::size_t num_classes, double noise, std::mt19937_64& rng);

/// Writes `dir/<split>/<class>_<index>.qt` and `dir/<split>.tsv`; returns the
/// manifest path. Samples are ordered class-major.
std::filesystem::path synth_split(const std::filesystem::path& dir, std::string_view split, const SynthSpec& spec);

}  // namespace qot::harness
