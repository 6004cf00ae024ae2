#include "qot/harness/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "qot/core/error.hpp"

namespace qot::harness {
namespace {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view bytes, std::size_t& pos, const char* what) {
  if (bytes.size() - pos < sizeof(T))
    throw FormatError(std::string("truncated ") + what, bytes.size());
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string encode_tensor(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.size() > std::numeric_limits<std::uint8_t>::max())
    throw DimensionError("tensor rank " + std::to_string(s.size()) + " exceeds 255");
  std::string out(kTensorMagic);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dtype()));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(s.size()));
  for (std::size_t d : s) {
    if (d > std::numeric_limits<std::uint32_t>::max())
      throw DimensionError("extent " + std::to_string(d) + " does not fit in u32");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  out.reserve(out.size() + t.size() * (t.dtype() == DType::F32 ? 4 : 8));
  for (double v : t.values()) {
    if (t.dtype() == DType::F32)
      put<float>(out, static_cast<float>(v));
    else
      put<double>(out, v);
  }
  return out;
}

Tensor decode_tensor(std::string_view bytes, std::size_t& pos) {
  const std::size_t start = pos;
  if (bytes.size() - pos < kTensorMagic.size() || bytes.substr(pos, kTensorMagic.size()) != kTensorMagic)
    throw FormatError("bad tensor magic", start);
  pos += kTensorMagic.size();
  const std::size_t dtype_at = pos;
  const auto code = get<std::uint8_t>(bytes, pos, "header");
  if (code > 1) throw FormatError("unknown dtype code " + std::to_string(code), dtype_at);
  const DType dtype = code == 0 ? DType::F32 : DType::F64;
  const auto rank = get<std::uint8_t>(bytes, pos, "header");
  Shape shape;
  std::size_t count = 1;
  for (std::size_t r = 0; r < rank; ++r) {
    const std::size_t dim_at = pos;
    const std::size_t d = get<std::uint32_t>(bytes, pos, "dims");
    if (d != 0 && count > std::numeric_limits<std::size_t>::max() / 8 / d)
      throw FormatError("dimension product overflows", dim_at);
    count *= d;
    shape.push_back(d);
  }
  const std::size_t width = dtype == DType::F32 ? 4 : 8;
  if ((bytes.size() - pos) / width < count)
    throw FormatError("truncated payload: need " + std::to_string(count * width) + " bytes, have " +
                          std::to_string(bytes.size() - pos),
                      bytes.size());
  std::vector<double> data(count);
  for (std::size_t n = 0; n < count; ++n)
    data[n] = dtype == DType::F32 ? static_cast<double>(get<float>(bytes, pos, "payload"))
                                  : get<double>(bytes, pos, "payload");
  return Tensor(std::move(shape), std::move(data), dtype);
}

Tensor decode_tensor(std::string_view bytes) {
  std::size_t pos = 0;
  Tensor t = decode_tensor(bytes, pos);
  if (pos != bytes.size()) throw FormatError("trailing bytes after tensor", pos);
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& t) { write_file(path, encode_tensor(t)); }

Tensor read_tensor_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

}  // namespace qot::harness
