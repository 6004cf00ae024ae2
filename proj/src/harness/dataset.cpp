#include "qot/harness/dataset.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qot/core/error.hpp"
#include "qot/harness/tensor_io.hpp"

namespace qot::harness {

std::vector<Sample> parse_manifest(std::string_view text) {
  std::vector<Sample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw FormatError("expected 'path<TAB>label'", lineno);
    const std::string label = line.substr(tab + 1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
    if (ec != std::errc() || ptr != label.data() + label.size())
      throw FormatError("label '" + label + "' is not an integer", lineno);
    out.push_back({line.substr(0, tab), value});
  }
  return out;
}

std::string format_manifest(const std::vector<Sample>& samples) {
  std::string out;
  for (const auto& s : samples) out += s.path.generic_string() + '\t' + std::to_string(s.label) + '\n';
  return out;
}

Dataset load_dataset(const std::filesystem::path& manifest, std::size_t num_classes, const Shape& image_shape) {
  std::vector<Sample> samples;
  try {
    samples = parse_manifest(read_file(manifest));
  } catch (const FormatError& e) {
    throw FormatError(manifest.string() + ": " + e.detail(), e.offset());
  }
  if (samples.empty()) throw ContractError(manifest.string() + ": manifest lists no samples");
  const auto root = manifest.parent_path();
  Dataset d;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto& s = samples[n];
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= num_classes)
      throw ContractError(manifest.string() + " line " + std::to_string(n + 1) + ": label " +
                          std::to_string(s.label) + " outside [0, " + std::to_string(num_classes) + ")");
    Tensor img = read_tensor_file(root / s.path);
    if (img.shape() != image_shape)
      throw DimensionError((root / s.path).string() + ": image shape " + to_string(img.shape()) + ", expected " +
                           to_string(image_shape));
    d.images.push_back(std::move(img));
    d.labels.push_back(s.label);
  }
  return d;
}

Tensor synth_image(std::size_t k, std::size_t num_classes, double noise, std::mt19937_64& rng) {
  constexpr std::size_t N = 56;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_classes);
  std::uniform_real_distribution<double> jitter(-2.0, 2.0);
  std::normal_distribution<double> pixel_noise(0.0, noise);
  const double cy = 27.5 + 15.0 * std::sin(angle) + jitter(rng);
  const double cx = 27.5 + 15.0 * std::cos(angle) + jitter(rng);
  const double sigma = 3.0 + 1.5 * static_cast<double>(k % 3);
  std::vector<double> v(N * N);
  for (std::size_t y = 0; y < N; ++y)
    for (std::size_t x = 0; x < N; ++x) {
      const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
      v[y * N + x] = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma)) + pixel_noise(rng);
    }
  return Tensor({N, N, 1}, std::move(v), DType::F32);
}

std::filesystem::path synth_split(const std::filesystem::path& dir, std::string_view split, const SynthSpec& spec) {
  if (spec.num_classes < 2) throw ContractError("synthetic data needs at least 2 classes");
  const auto sub = dir / split;
  std::error_code ec;
  std::filesystem::create_directories(sub, ec);
  if (ec) throw IoError("cannot create " + sub.string() + ": " + ec.message());
  std::mt19937_64 rng(spec.seed);
  std::vector<Sample> samples;
  for (std::size_t k = 0; k < spec.num_classes; ++k)
    for (std::size_t n = 0; n < spec.per_class; ++n) {
      const std::filesystem::path rel =
          std::filesystem::path(split) / (std::to_string(k) + "_" + std::to_string(n) + ".qt");
      write_tensor_file(dir / rel, synth_image(k, spec.num_classes, spec.noise, rng));
      samples.push_back({rel, static_cast<int>(k)});
    }
  const auto manifest = dir / (std::string(split) + ".tsv");
  write_file(manifest, format_manifest(samples));
  return manifest;
}

}  // namespace qot::harness
