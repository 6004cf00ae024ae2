#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "qot/harness/config.hpp"
#include "qot/harness/model.hpp"

namespace qot::harness {

inline constexpr int kCheckpointSchema = 1;

/// Text header (`qot-checkpoint`, schema_version, step, tensor count, the full
/// run config, `end_header`), then per parameter: u32 name length, name bytes,
/// and the tensor in tensor-file encoding.
std::string encode_checkpoint(const Model& model, const RunConfig& run, std::uint64_t step);

struct LoadedCheckpoint {
  RunConfig run;
  std::uint64_t step = 0;
  Model model;
};

/// Rebuilds the model from the stored config and overwrites every parameter.
/// Throws FormatError on a malformed file or a parameter set that does not match.
LoadedCheckpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const RunConfig& run,
                     std::uint64_t step);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qot::harness
