#pragma once

#include <array>
#include <functional>
#include <span>

#include "qot/core/quaternion.hpp"
#include "qot/core/tensor.hpp"

namespace qot {

/// A tensor of quaternions: a real tensor whose last axis has extent 4 and
/// holds the (r, i, j, k) components of each element (interleaved layout).
class QuatTensor {
public:
  QuatTensor() : base_(Shape{4}) {}
  explicit QuatTensor(Tensor base);

  static QuatTensor zeros(const Shape& logical_shape);
  /// Matrix with the quaternion 1 on the diagonal.
  static QuatTensor identity(std::size_t n);
  /// Stack four same-shaped real tensors into the component axis.
  static QuatTensor stack(const Tensor& r, const Tensor& i, const Tensor& j, const Tensor& k);

  const Tensor& base() const noexcept { return base_; }
  Tensor& base() noexcept { return base_; }
  Shape logical_shape() const;
  /// Number of quaternion elements.
  std::size_t count() const noexcept { return base_.size() / 4; }

  Quaternion get(std::size_t flat) const;
  void set(std::size_t flat, const Quaternion& q);
  Quaternion at(std::size_t row, std::size_t col) const;

  /// Component c ∈ {0: r, 1: i, 2: j, 3: k} as a real tensor of logical shape.
  Tensor component(int c) const;
  std::array<Tensor, 4> components() const;

  QuatTensor reshape(const Shape& logical_shape) const;

private:
  Tensor base_;
};

QuatTensor add(const QuatTensor& a, const QuatTensor& b);
QuatTensor sub(const QuatTensor& a, const QuatTensor& b);
QuatTensor scale(const QuatTensor& a, double s);
QuatTensor conjugate(const QuatTensor& a);
/// Apply a real scalar function to all four components of every element.
QuatTensor component_map(const QuatTensor& a, const std::function<double(double)>& f);
/// Swap the two logical axes of a quaternion matrix, optionally conjugating each entry.
QuatTensor transpose(const QuatTensor& a, bool conjugate_entries = false);
QuatTensor concat(std::span<const QuatTensor> parts, std::size_t logical_axis);
std::vector<QuatTensor> split(const QuatTensor& a, std::size_t logical_axis, std::span<const std::size_t> extents);

/// C[a][c] = Σ_b A[a][b] ⊗ B[b][c] for logical shapes [m×n] · [n×p].
QuatTensor quat_matmul(const QuatTensor& a, const QuatTensor& b);

namespace kernels {

/// out[m×p] += A[m×n] ⊗ B[n×p] on interleaved buffers.
void quat_matmul_acc(std::span<const double> a, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p);
/// out[m×n] += G[m×p] ⊗ conj(B)ᵀ, the left-operand gradient of quat_matmul.
void quat_matmul_grad_a(std::span<const double> g, std::span<const double> b, std::span<double> out,
                        std::size_t m, std::size_t n, std::size_t p);
/// out[n×p] += conj(A)ᵀ ⊗ G, the right-operand gradient of quat_matmul.
void quat_matmul_grad_b(std::span<const double> a, std::span<const double> g, std::span<double> out,
                        std::size_t m, std::size_t n, std::size_t p);

}  // namespace kernels

}  // namespace qot
