#include "qot/harness/checkpoint.hpp"

#include <charconv>
#include <cstring>
#include <map>
#include <sstream>

#include "qot/core/error.hpp"
#include "qot/harness/tensor_io.hpp"

namespace qot::harness {

namespace {

std::uint64_t header_number(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw FormatError("checkpoint header " + key + " is not a number: '" + v + "'", 0);
  return out;
}

}  // namespace

std::string encode_checkpoint(const Model& model, const RunConfig& run, std::uint64_t step) {
  const nn::ParamList params = model.parameters();
  std::ostringstream header;
  header << "qot-checkpoint\nschema_version = " << kCheckpointSchema << "\nstep = " << step
         << "\ntensors = " << params.size() << '\n'
         << to_text(run) << "end_header\n";
  std::string out = header.str();
  for (const auto& p : params) {
    const auto len = static_cast<std::uint32_t>(p.name.size());
    char buf[4];
    std::memcpy(buf, &len, 4);
    out.append(buf, 4);
    out += p.name;
    out += encode_tensor(p.var.value());
  }
  return out;
}

LoadedCheckpoint decode_checkpoint(std::string_view bytes) {
  const std::string_view end_marker = "end_header\n";
  const auto end = bytes.find(end_marker);
  if (!bytes.starts_with("qot-checkpoint\n") || end == std::string_view::npos)
    throw FormatError("not a checkpoint header", 0);
  std::istringstream header{std::string(bytes.substr(0, end))};
  std::string line, config_text;
  std::map<std::string, std::string> meta;
  std::getline(header, line);
  while (std::getline(header, line)) {
    const auto eq = line.find(" = ");
    const std::string key = eq == std::string::npos ? line : line.substr(0, eq);
    if (key == "schema_version" || key == "step" || key == "tensors")
      meta[key] = line.substr(eq + 3);
    else
      config_text += line + '\n';
  }
  for (const char* k : {"schema_version", "step", "tensors"})
    if (!meta.contains(k)) throw FormatError(std::string("checkpoint header lacks ") + k, 0);
  if (meta["schema_version"] != std::to_string(kCheckpointSchema))
    throw FormatError("unsupported checkpoint schema " + meta["schema_version"], 0);

  RunConfig run = parse_config(config_text);
  run.validate();
  Model model(run.model, run.train.seed);
  const nn::ParamList params = model.parameters();
  const std::size_t count = header_number("tensors", meta["tensors"]);
  if (count != params.size())
    throw FormatError("checkpoint holds " + std::to_string(count) + " tensors, model has " +
                          std::to_string(params.size()),
                      0);

  std::size_t pos = end + end_marker.size();
  for (const auto& p : params) {
    const std::size_t at = pos;
    if (bytes.size() - pos < 4) throw FormatError("truncated tensor name", bytes.size());
    std::uint32_t len;
    std::memcpy(&len, bytes.data() + pos, 4);
    pos += 4;
    if (bytes.size() - pos < len) throw FormatError("truncated tensor name", bytes.size());
    const std::string name(bytes.substr(pos, len));
    pos += len;
    if (name != p.name) throw FormatError("expected tensor '" + p.name + "', found '" + name + "'", at);
    Tensor t = decode_tensor(bytes, pos);
    if (t.shape() != p.var.shape())
      throw FormatError("tensor '" + name + "' has shape " + to_string(t.shape()) + ", model expects " +
                            to_string(p.var.shape()),
                        at);
    p.var.mutable_value() = std::move(t);
  }
  if (pos != bytes.size()) throw FormatError("trailing bytes after last tensor", pos);
  return {std::move(run), header_number("step", meta["step"]), std::move(model)};
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const RunConfig& run,
                     std::uint64_t step) {
  write_file(path, encode_checkpoint(model, run, step));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

}  // namespace qot::harness
