#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qot {

using Shape = std::vector<std::size_t>;

enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);
std::string_view to_string(DType dtype);

/// Dense row-major array of reals. Values are held as double; an F32 tensor
/// only ever holds values exactly representable as float, so it round-trips
/// through 4-byte storage bitwise. A rank-0 tensor is a scalar with one element.
class Tensor {
public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape, DType dtype = DType::F64);
  Tensor(Shape shape, std::vector<double> data, DType dtype = DType::F64);

  static Tensor zeros(Shape shape, DType dtype = DType::F64) { return Tensor(std::move(shape), dtype); }
  static Tensor full(Shape shape, double value, DType dtype = DType::F64);
  static Tensor scalar(double value) { return Tensor({}, {value}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  DType dtype() const noexcept { return dtype_; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  /// Multi-index access, bounds-checked.
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  double item() const;

  Tensor reshape(Shape shape) const;
  Tensor cast(DType dtype) const;

  bool all_finite() const;

  /// Bitwise equality of shape, dtype and every value.
  bool identical(const Tensor& other) const;

private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
  DType dtype_ = DType::F64;
};

// Elementwise suite. Binary ops require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

double max_abs_diff(const Tensor& a, const Tensor& b);

/// Concatenate along `axis`; all other extents must agree.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
/// Split along `axis` into pieces of the given extents (must sum to the axis extent).
std::vector<Tensor> split(const Tensor& t, std::size_t axis, std::span<const std::size_t> extents);
/// Swap axes 0 and 1 of a tensor of rank ≥ 2; trailing axes move as a block.
Tensor transpose01(const Tensor& t);

}  // namespace qot
