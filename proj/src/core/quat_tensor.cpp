#include "qot/core/quat_tensor.hpp"

#include "qot/core/error.hpp"
#include "qot/core/hamilton_kernels.hpp"

namespace qot {

QuatTensor::QuatTensor(Tensor base) : base_(std::move(base)) {
  if (base_.rank() == 0 || base_.shape().back() != 4) {
    throw DimensionError("quaternion tensor needs trailing component axis of extent 4, got " +
                         to_string(base_.shape()));
  }
}

QuatTensor QuatTensor::zeros(const Shape& logical_shape) {
  Shape s = logical_shape;
  s.push_back(4);
  return QuatTensor(Tensor(s));
}

QuatTensor QuatTensor::identity(std::size_t n) {
  QuatTensor out = zeros({n, n});
  for (std::size_t d = 0; d < n; ++d) out.set(d * n + d, Quaternion::identity());
  return out;
}

QuatTensor QuatTensor::stack(const Tensor& r, const Tensor& i, const Tensor& j, const Tensor& k) {
  if (r.shape() != i.shape() || r.shape() != j.shape() || r.shape() != k.shape()) {
    throw DimensionError("quaternion stack of mismatched shapes " + to_string(r.shape()) + ", " +
                         to_string(i.shape()) + ", " + to_string(j.shape()) + ", " + to_string(k.shape()));
  }
  QuatTensor out = zeros(r.shape());
  for (std::size_t n = 0; n < r.size(); ++n) out.set(n, {r[n], i[n], j[n], k[n]});
  return out;
}

Shape QuatTensor::logical_shape() const {
  const Shape& s = base_.shape();
  return Shape(s.begin(), s.end() - 1);
}

Quaternion QuatTensor::get(std::size_t flat) const {
  const double* p = base_.data().data() + 4 * flat;
  return {p[0], p[1], p[2], p[3]};
}

void QuatTensor::set(std::size_t flat, const Quaternion& q) {
  double* p = base_.data().data() + 4 * flat;
  p[0] = q.r;
  p[1] = q.i;
  p[2] = q.j;
  p[3] = q.k;
}

Quaternion QuatTensor::at(std::size_t row, std::size_t col) const {
  const Shape s = logical_shape();
  if (s.size() != 2 || row >= s[0] || col >= s[1]) {
    throw DimensionError("quaternion matrix index out of range for " + to_string(s));
  }
  return get(row * s[1] + col);
}

Tensor QuatTensor::component(int c) const {
  Tensor out(logical_shape());
  for (std::size_t n = 0; n < count(); ++n) out[n] = base_[4 * n + static_cast<std::size_t>(c)];
  return out;
}

std::array<Tensor, 4> QuatTensor::components() const {
  return {component(0), component(1), component(2), component(3)};
}

QuatTensor QuatTensor::reshape(const Shape& logical_shape) const {
  Shape s = logical_shape;
  s.push_back(4);
  return QuatTensor(base_.reshape(s));
}

QuatTensor add(const QuatTensor& a, const QuatTensor& b) { return QuatTensor(add(a.base(), b.base())); }
QuatTensor sub(const QuatTensor& a, const QuatTensor& b) { return QuatTensor(sub(a.base(), b.base())); }
QuatTensor scale(const QuatTensor& a, double s) { return QuatTensor(scale(a.base(), s)); }

QuatTensor conjugate(const QuatTensor& a) {
  QuatTensor out = a;
  for (std::size_t n = 0; n < a.count(); ++n) out.set(n, a.get(n).conjugate());
  return out;
}

QuatTensor component_map(const QuatTensor& a, const std::function<double(double)>& f) {
  Tensor out(a.base().shape());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = f(a.base()[n]);
  return QuatTensor(std::move(out));
}

QuatTensor transpose(const QuatTensor& a, bool conjugate_entries) {
  if (a.logical_shape().size() != 2) {
    throw DimensionError("quaternion transpose needs a matrix, got " + to_string(a.logical_shape()));
  }
  QuatTensor out(transpose01(a.base()));
  return conjugate_entries ? conjugate(out) : out;
}

QuatTensor concat(std::span<const QuatTensor> parts, std::size_t logical_axis) {
  std::vector<Tensor> bases;
  bases.reserve(parts.size());
  for (const QuatTensor& p : parts) bases.push_back(p.base());
  return QuatTensor(concat(bases, logical_axis));
}

std::vector<QuatTensor> split(const QuatTensor& a, std::size_t logical_axis, std::span<const std::size_t> extents) {
  if (logical_axis + 1 >= a.base().rank()) {
    throw DimensionError("split axis out of range for quaternion tensor " + to_string(a.logical_shape()));
  }
  std::vector<QuatTensor> out;
  for (Tensor& t : split(a.base(), logical_axis, extents)) out.emplace_back(std::move(t));
  return out;
}

QuatTensor quat_matmul(const QuatTensor& a, const QuatTensor& b) {
  const Shape sa = a.logical_shape(), sb = b.logical_shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    throw DimensionError("quat_matmul shape mismatch " + to_string(sa) + " · " + to_string(sb));
  }
  QuatTensor out = QuatTensor::zeros({sa[0], sb[1]});
  kernels::quat_matmul_acc(a.base().data(), b.base().data(), out.base().data(), sa[0], sa[1], sb[1]);
  return out;
}

namespace kernels {

void quat_matmul_acc(std::span<const double> a, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p) {
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      const double* ap = &a[4 * (r * n + k)];
      for (std::size_t c = 0; c < p; ++c) hamilton_acc(ap, &b[4 * (k * p + c)], &out[4 * (r * p + c)]);
    }
}

void quat_matmul_grad_a(std::span<const double> g, std::span<const double> b, std::span<double> out,
                        std::size_t m, std::size_t n, std::size_t p) {
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      double* op = &out[4 * (r * n + k)];
      for (std::size_t c = 0; c < p; ++c) hamilton_acc_conj_b(&g[4 * (r * p + c)], &b[4 * (k * p + c)], op);
    }
}

void quat_matmul_grad_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                        std::size_t m, std::size_t n, std::size_t p) {
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      const double* ap = &a[4 * (r * n + k)];
      for (std::size_t c = 0; c < p; ++c) hamilton_acc_conj_a(ap, &g[4 * (r * p + c)], &out[4 * (k * p + c)]);
    }
}

}  // namespace kernels

}  // namespace qot
