#pragma once

// Interleaved (r, i, j, k) Hamilton-product accumulators used by the matrix,
// linear and convolution kernels.

namespace qot::kernels {

/// o += a ⊗ b
inline void hamilton_acc(const double* a, const double* b, double* o) {
  o[0] += a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
  o[1] += a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2];
  o[2] += a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1];
  o[3] += a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0];
}

/// o += a ⊗ conj(b)
inline void hamilton_acc_conj_b(const double* a, const double* b, double* o) {
  const double c[4] = {b[0], -b[1], -b[2], -b[3]};
  hamilton_acc(a, c, o);
}

/// o += conj(a) ⊗ b
inline void hamilton_acc_conj_a(const double* a, const double* b, double* o) {
  const double c[4] = {a[0], -a[1], -a[2], -a[3]};
  hamilton_acc(c, b, o);
}

}  // namespace qot::kernels
