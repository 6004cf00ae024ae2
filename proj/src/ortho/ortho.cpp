#include "qot/ortho/ortho.hpp"

#include "qot/core/error.hpp"

namespace qot::ortho {

ToyBackbone ToyBackbone::create(std::size_t in_channels, std::size_t feature_channels, nn::Rng& rng,
                                std::size_t base_width) {
  if (in_channels == 0 || feature_channels == 0 || base_width == 0)
    throw ContractError("backbone widths must be positive");
  const std::array<std::size_t, 5> widths{in_channels, base_width, 2 * base_width, 4 * base_width, feature_channels};
  ToyBackbone b;
  for (std::size_t n = 0; n < 4; ++n)
    b.convs.push_back(nn::Conv2d::create(3, 3, widths[n], widths[n + 1], rng, n == 0 ? 1 : 2, 1));
  return b;
}

ag::Var ToyBackbone::forward(const ag::Var& image) const {
  const Shape& s = image.shape();
  if (s.size() != 3 || s[0] != kImageSize || s[1] != kImageSize || s[2] != in_channels())
    throw DimensionError("backbone expects [56×56×" + std::to_string(in_channels()) + "], got " + to_string(s));
  ag::Var x = image;
  for (const auto& c : convs) x = ag::relu(c.forward(x));
  return x;
}

void ToyBackbone::collect(const std::string& prefix, nn::ParamList& out) const {
  for (std::size_t n = 0; n < convs.size(); ++n) convs[n].collect(prefix + ".conv" + std::to_string(n), out);
}

OrthoHead OrthoHead::create(std::size_t feature_channels, std::size_t channels, std::size_t classes, nn::Rng& rng) {
  if (feature_channels == 0 || channels == 0 || classes == 0) throw ContractError("head widths must be positive");
  OrthoHead h;
  for (auto& b : h.branches) b = nn::Conv2d::create(1, 1, feature_channels, channels, rng);
  h.aux = nn::Linear::create(kBranches * channels, classes, rng);
  return h;
}

void OrthoHead::collect(const std::string& prefix, nn::ParamList& out) const {
  for (std::size_t n = 0; n < kBranches; ++n) branches[n].collect(prefix + ".branch" + std::to_string(n), out);
  aux.collect(prefix + ".aux", out);
}

Decomposition decompose(const ag::Var& features, const OrthoHead& head) {
  const Shape& s = features.shape();
  if (s.size() != 3 || s[2] != head.in_channels())
    throw DimensionError("decompose expects [H×W×" + std::to_string(head.in_channels()) + "], got " + to_string(s));
  Decomposition d;
  for (std::size_t n = 0; n < kBranches; ++n) {
    d.maps[n] = head.branches[n].forward(features);
    d.pooled[n] = nn::gap(d.maps[n]);
    d.probs[n] = ag::softmax(d.pooled[n], 0);
  }
  return d;
}

ag::Var build_quaternion(const ag::Var& f1, const ag::Var& f2, const ag::Var& f3) {
  if (f1.shape() != f2.shape() || f1.shape() != f3.shape())
    throw DimensionError("build_quaternion shapes differ: " + to_string(f1.shape()) + ", " + to_string(f2.shape()) +
                         ", " + to_string(f3.shape()));
  const ag::Var avg = ag::scale(ag::add(ag::add(f1, f2), f3), 1.0 / 3.0);
  return ag::stack_components(avg, f1, f2, f3);
}

QuatTensor build_quaternion(const Tensor& f1, const Tensor& f2, const Tensor& f3) {
  ag::NoGradGuard guard;
  return QuatTensor(
      build_quaternion(ag::Var::constant(f1), ag::Var::constant(f2), ag::Var::constant(f3)).value());
}

FinetuneTerms finetune_loss(std::span<const ag::Var> features, std::span<const int> labels, const OrthoHead& head,
                            const nn::LossWeights& w) {
  w.validate();
  if (features.empty()) throw ContractError("finetune batch is empty");
  if (features.size() != labels.size())
    throw ContractError("finetune batch has " + std::to_string(features.size()) + " samples but " +
                        std::to_string(labels.size()) + " labels");
  std::vector<ag::Var> rows;
  ag::Var ortho;
  for (const auto& f : features) {
    const Decomposition d = decompose(f, head);
    rows.push_back(ag::reshape(ag::concat(d.pooled, 0), {1, kBranches * head.channels()}));
    const ag::Var o = ag::orthogonal_loss(d.probs[0], d.probs[1], d.probs[2]);
    ortho = ortho ? ag::add(ortho, o) : o;
  }
  ortho = ag::scale(ortho, 1.0 / static_cast<double>(features.size()));
  const ag::Var logits = head.aux.forward(ag::concat(rows, 0));
  const ag::Var ce = ag::cross_entropy(logits, labels);
  return {nn::combined_loss(ce, ortho, w), ce, ortho, logits};
}

FinetuneResult finetune_step(std::span<const ag::Var> images, std::span<const int> labels,
                             const ToyBackbone& backbone, const OrthoHead& head, const nn::LossWeights& w) {
  std::vector<ag::Var> features;
  features.reserve(images.size());
  for (const auto& img : images) features.push_back(backbone.forward(img));
  const FinetuneTerms t = finetune_loss(features, labels, head, w);
  ag::backward(t.total);
  return {t.total.value().item(), t.ce.value().item(), t.ortho.value().item()};
}

double mean_abs_cosine(const ag::Var& features, const OrthoHead& head) {
  ag::NoGradGuard guard;
  const Decomposition d = decompose(features, head);
  return ag::orthogonal_loss(d.probs[0], d.probs[1], d.probs[2]).value().item();
}

QuatTensor features_to_quaternion(const Tensor& features, const OrthoHead& head) {
  ag::NoGradGuard guard;
  const Decomposition d = decompose(ag::Var::constant(features), head);
  return QuatTensor(build_quaternion(d.maps[0], d.maps[1], d.maps[2]).value());
}

Tensor backbone_features(const Tensor& image, const ToyBackbone& backbone) {
  ag::NoGradGuard guard;
  return backbone.forward(ag::Var::constant(image)).value();
}

QuatTensor extract_pipeline(const Tensor& image, const ToyBackbone& backbone, const OrthoHead& head) {
  return features_to_quaternion(backbone_features(image, backbone), head);
}

}  // namespace qot::ortho
