#include "qot/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "qot/core/error.hpp"
#include "qot/harness/tensor_io.hpp"
#include "qot/ortho/ortho.hpp"

namespace qot::harness {

void ModelConfig::validate() const {
  qvit.validate();
  if (qvit.height != 7 || qvit.width != 7)
    throw ContractError("the toy backbone produces 7×7 maps; height and width must be 7");
  if (image_channels == 0 || backbone_channels == 0 || backbone_width == 0)
    throw ContractError("backbone widths must be positive");
}

Shape ModelConfig::input_shape() const {
  if (precomputed_features) return {ortho::kFeatureSize, ortho::kFeatureSize, backbone_channels};
  return {ortho::kImageSize, ortho::kImageSize, image_channels};
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("lr must be positive and finite");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ContractError("momentum must be in [0, 1)");
  if (batch_size == 0) throw ContractError("batch_size must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("lambda must be finite and ≥ 0");
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
}

bool is_preset(std::string_view name) { return name == "default" || name == "paper" || name == "desk"; }

RunConfig preset(std::string_view name) {
  RunConfig c;
  if (name == "default") return c;
  if (name == "paper") {
    c.model.qvit.embed_dim = 16;
    c.model.qvit.ffn_hidden = 32;
    return c;
  }
  if (name == "desk") {
    auto& q = c.model.qvit;
    q.channels = 16;
    q.embed_dim = 16;
    q.heads = 2;
    q.blocks = 1;
    q.ffn_hidden = 32;
    q.mlp_hidden = 32;
    c.model.backbone_channels = 16;
    c.model.backbone_width = 4;
    return c;
  }
  throw ContractError("unknown preset '" + std::string(name) + "' (expected default, paper or desk)");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("not a number: '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

template <class T>
Setter size_field(T RunConfig::*group, std::size_t T::*field) {
  return [=](RunConfig& c, const std::string& v) { (c.*group).*field = parse_number<std::size_t>(v); };
}

Setter qvit_size(std::size_t vit::QViTConfig::*field) {
  return [=](RunConfig& c, const std::string& v) { c.model.qvit.*field = parse_number<std::size_t>(v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"height", qvit_size(&vit::QViTConfig::height)},
      {"width", qvit_size(&vit::QViTConfig::width)},
      {"channels", qvit_size(&vit::QViTConfig::channels)},
      {"embed_dim", qvit_size(&vit::QViTConfig::embed_dim)},
      {"heads", qvit_size(&vit::QViTConfig::heads)},
      {"blocks", qvit_size(&vit::QViTConfig::blocks)},
      {"ffn_convs", qvit_size(&vit::QViTConfig::ffn_convs)},
      {"ffn_hidden", qvit_size(&vit::QViTConfig::ffn_hidden)},
      {"mlp_layers", qvit_size(&vit::QViTConfig::mlp_layers)},
      {"mlp_hidden", qvit_size(&vit::QViTConfig::mlp_hidden)},
      {"num_classes", qvit_size(&vit::QViTConfig::num_classes)},
      {"conjugate_keys", [](RunConfig& c, const std::string& v) { c.model.qvit.conjugate_keys = parse_bool(v); }},
      {"image_channels", size_field(&RunConfig::model, &ModelConfig::image_channels)},
      {"backbone_channels", size_field(&RunConfig::model, &ModelConfig::backbone_channels)},
      {"backbone_width", size_field(&RunConfig::model, &ModelConfig::backbone_width)},
      {"precomputed_features",
       [](RunConfig& c, const std::string& v) { c.model.precomputed_features = parse_bool(v); }},
      {"optimizer",
       [](RunConfig& c, const std::string& v) {
         if (v == "adam")
           c.train.optimizer = Optim::Adam;
         else if (v == "sgd")
           c.train.optimizer = Optim::Sgd;
         else
           throw std::invalid_argument("optimizer must be adam or sgd, got '" + v + "'");
       }},
      {"lr", [](RunConfig& c, const std::string& v) { c.train.lr = parse_number<double>(v); }},
      {"momentum", [](RunConfig& c, const std::string& v) { c.train.momentum = parse_number<double>(v); }},
      {"epochs_ortho", size_field(&RunConfig::train, &TrainConfig::epochs_ortho)},
      {"epochs_qvit", size_field(&RunConfig::train, &TrainConfig::epochs_qvit)},
      {"batch_size", size_field(&RunConfig::train, &TrainConfig::batch_size)},
      {"lambda", [](RunConfig& c, const std::string& v) { c.train.lambda = parse_number<double>(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.train.seed = parse_number<std::uint64_t>(v); }},
  };
  return table;
}

std::string fmt_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool seen_key = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw FormatError("expected 'key = value'", lineno);
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "preset") {
      if (seen_key) throw FormatError("'preset' must precede every other key", lineno);
      if (!is_preset(value)) throw FormatError("unknown preset '" + value + "'", lineno);
      c = preset(value);
      seen_key = true;
      continue;
    }
    seen_key = true;
    const auto it = setters().find(key);
    if (it == setters().end()) throw FormatError("unknown key '" + key + "'", lineno);
    try {
      it->second(c, value);
    } catch (const std::invalid_argument& e) {
      throw FormatError(key + ": " + e.what(), lineno);
    }
  }
  return c;
}

RunConfig load_config(const std::string& name_or_path) {
  if (is_preset(name_or_path)) return preset(name_or_path);
  const std::string text = read_file(name_or_path);
  try {
    return parse_config(text);
  } catch (const FormatError& e) {
    throw FormatError(name_or_path + ": " + e.detail(), e.offset());
  }
}

std::string to_text(const RunConfig& c) {
  const auto& q = c.model.qvit;
  std::ostringstream os;
  os << "height = " << q.height << "\nwidth = " << q.width << "\nchannels = " << q.channels
     << "\nembed_dim = " << q.embed_dim << "\nheads = " << q.heads << "\nblocks = " << q.blocks
     << "\nffn_convs = " << q.ffn_convs << "\nffn_hidden = " << q.ffn_hidden << "\nmlp_layers = " << q.mlp_layers
     << "\nmlp_hidden = " << q.mlp_hidden << "\nnum_classes = " << q.num_classes
     << "\nconjugate_keys = " << (q.conjugate_keys ? "true" : "false")
     << "\nimage_channels = " << c.model.image_channels << "\nbackbone_channels = " << c.model.backbone_channels
     << "\nbackbone_width = " << c.model.backbone_width
     << "\nprecomputed_features = " << (c.model.precomputed_features ? "true" : "false")
     << "\noptimizer = " << (c.train.optimizer == Optim::Adam ? "adam" : "sgd") << "\nlr = " << fmt_double(c.train.lr)
     << "\nmomentum = " << fmt_double(c.train.momentum) << "\nepochs_ortho = " << c.train.epochs_ortho
     << "\nepochs_qvit = " << c.train.epochs_qvit << "\nbatch_size = " << c.train.batch_size
     << "\nlambda = " << fmt_double(c.train.lambda) << "\nseed = " << c.train.seed << '\n';
  return os.str();
}

}  // namespace qot::harness
