#include "qot/core/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "qot/core/error.hpp"

namespace qot {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t a = 0; a < shape.size(); ++a) os << (a ? "×" : "") << shape[a];
  os << ']';
  return os.str();
}

std::string_view to_string(DType dtype) { return dtype == DType::F32 ? "f32" : "f64"; }

Tensor::Tensor(Shape shape, DType dtype)
    : shape_(std::move(shape)), data_(numel(shape_), 0.0), dtype_(dtype) {}

Tensor::Tensor(Shape shape, std::vector<double> data, DType dtype)
    : shape_(std::move(shape)), data_(std::move(data)), dtype_(dtype) {
  if (data_.size() != numel(shape_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + to_string(shape_));
  }
  if (dtype_ == DType::F32) {
    for (double& v : data_) v = static_cast<float>(v);
  }
}

Tensor Tensor::full(Shape shape, double value, DType dtype) {
  Tensor t(std::move(shape), dtype);
  std::fill(t.data_.begin(), t.data_.end(), dtype == DType::F32 ? static_cast<float>(value) : value);
  return t;
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw DimensionError("index rank " + std::to_string(index.size()) + " vs tensor " + to_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw DimensionError("index out of range for " + to_string(shape_));
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

double Tensor::item() const {
  if (data_.size() != 1) throw ContractError("item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

Tensor Tensor::reshape(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

Tensor Tensor::cast(DType dtype) const {
  return Tensor(shape_, data_, dtype);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Tensor::identical(const Tensor& other) const {
  if (shape_ != other.shape_ || dtype_ != other.dtype_) return false;
  return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

namespace {
void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = a[n] + b[n];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = a[n] - b[n];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out(a.shape());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = a[n] * s;
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

namespace {
// outer × axis × inner decomposition of a shape around `axis`.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};
AxisSplit around(const Shape& s, std::size_t axis) {
  AxisSplit r;
  for (std::size_t a = 0; a < axis; ++a) r.outer *= s[a];
  r.extent = s[axis];
  for (std::size_t a = axis + 1; a < s.size(); ++a) r.inner *= s[a];
  return r;
}
}  // namespace

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size()) throw DimensionError("concat axis out of range for " + to_string(ref));
  Shape out_shape = ref;
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    Shape s = p.shape();
    if (s.size() != ref.size()) throw DimensionError("concat rank mismatch " + to_string(ref) + " vs " + to_string(s));
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (a != axis && s[a] != ref[a]) {
        throw DimensionError("concat extent mismatch " + to_string(ref) + " vs " + to_string(s));
      }
    }
    out_shape[axis] += s[axis];
  }
  Tensor out(out_shape);
  const AxisSplit o = around(out_shape, axis);
  std::size_t base = 0;
  for (const Tensor& p : parts) {
    const std::size_t block = p.extent(axis) * o.inner;
    for (std::size_t x = 0; x < o.outer; ++x) {
      std::copy_n(p.data().begin() + x * block, block, out.data().begin() + x * o.extent * o.inner + base);
    }
    base += block;
  }
  return out;
}

std::vector<Tensor> split(const Tensor& t, std::size_t axis, std::span<const std::size_t> extents) {
  if (axis >= t.rank()) throw DimensionError("split axis out of range for " + to_string(t.shape()));
  if (std::accumulate(extents.begin(), extents.end(), std::size_t{0}) != t.extent(axis)) {
    throw DimensionError("split extents do not sum to axis extent of " + to_string(t.shape()));
  }
  const AxisSplit s = around(t.shape(), axis);
  std::vector<Tensor> out;
  std::size_t base = 0;
  for (std::size_t e : extents) {
    Shape ps = t.shape();
    ps[axis] = e;
    Tensor p(ps);
    const std::size_t block = e * s.inner;
    for (std::size_t x = 0; x < s.outer; ++x) {
      std::copy_n(t.data().begin() + x * s.extent * s.inner + base, block, p.data().begin() + x * block);
    }
    base += block;
    out.push_back(std::move(p));
  }
  return out;
}

Tensor transpose01(const Tensor& t) {
  if (t.rank() < 2) throw DimensionError("transpose needs rank ≥ 2, got " + to_string(t.shape()));
  Shape s = t.shape();
  const std::size_t rows = s[0], cols = s[1];
  const std::size_t inner = numel(Shape(s.begin() + 2, s.end()));
  std::swap(s[0], s[1]);
  Tensor out(s, t.dtype());
  for (std::size_t a = 0; a < rows; ++a)
    for (std::size_t b = 0; b < cols; ++b)
      std::copy_n(t.data().begin() + (a * cols + b) * inner, inner, out.data().begin() + (b * rows + a) * inner);
  return out;
}

}  // namespace qot
