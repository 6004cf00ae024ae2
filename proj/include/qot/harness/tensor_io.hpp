#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qot/core/tensor.hpp"

namespace qot::harness {

/// Binary layout: "QTNSR1", dtype u8 (0 = f32, 1 = f64), rank u8, rank × u32
/// dims, then the row-major payload. Everything little-endian.
inline constexpr std::string_view kTensorMagic = "QTNSR1";

std::string encode_tensor(const Tensor& t);
/// Decode one tensor starting at `pos`, advancing it past the payload.
/// Throws FormatError with the absolute byte offset of the first bad byte.
Tensor decode_tensor(std::string_view bytes, std::size_t& pos);
Tensor decode_tensor(std::string_view bytes);

void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
/// Throws IoError when unreadable, FormatError (message prefixed with the path) when malformed.
Tensor read_tensor_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace qot::harness
