#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace qot {

/// Quaternion r + i·i + j·j + k·k. Stored in (r, i, j, k) order, which is also
/// the component order of every interleaved quaternion tensor.
template <typename T>
struct BasicQuaternion {
  T r{}, i{}, j{}, k{};

  constexpr BasicQuaternion() = default;
  constexpr BasicQuaternion(T r_, T i_, T j_, T k_) : r(r_), i(i_), j(j_), k(k_) {}

  static constexpr BasicQuaternion identity() { return {T(1), T(0), T(0), T(0)}; }

  constexpr std::array<T, 4> components() const { return {r, i, j, k}; }

  constexpr BasicQuaternion conjugate() const { return {r, -i, -j, -k}; }

  T norm() const { return std::sqrt(r * r + i * i + j * j + k * k); }

  bool finite() const {
    return std::isfinite(r) && std::isfinite(i) && std::isfinite(j) && std::isfinite(k);
  }

  constexpr BasicQuaternion operator+(const BasicQuaternion& o) const {
    return {r + o.r, i + o.i, j + o.j, k + o.k};
  }
  constexpr BasicQuaternion operator-(const BasicQuaternion& o) const {
    return {r - o.r, i - o.i, j - o.j, k - o.k};
  }
  constexpr BasicQuaternion operator-() const { return {-r, -i, -j, -k}; }
  constexpr BasicQuaternion operator*(T s) const { return {r * s, i * s, j * s, k * s}; }
  constexpr bool operator==(const BasicQuaternion&) const = default;
};

/// Hamilton product a ⊗ b.
template <typename T>
constexpr BasicQuaternion<T> hamilton(const BasicQuaternion<T>& a, const BasicQuaternion<T>& b) {
  return {a.r * b.r - a.i * b.i - a.j * b.j - a.k * b.k,
          a.r * b.i + a.i * b.r + a.j * b.k - a.k * b.j,
          a.r * b.j - a.i * b.k + a.j * b.r + a.k * b.i,
          a.r * b.k + a.i * b.j - a.j * b.i + a.k * b.r};
}

template <typename T>
constexpr BasicQuaternion<T> operator*(const BasicQuaternion<T>& a, const BasicQuaternion<T>& b) {
  return hamilton(a, b);
}

/// Row-major 4×4 real matrix M with M·(g_r, g_i, g_j, g_k)ᵀ = q ⊗ g.
template <typename T>
constexpr std::array<std::array<T, 4>, 4> left_matrix(const BasicQuaternion<T>& q) {
  return {{{q.r, -q.i, -q.j, -q.k},
           {q.i, q.r, -q.k, q.j},
           {q.j, q.k, q.r, -q.i},
           {q.k, -q.j, q.i, q.r}}};
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const BasicQuaternion<T>& q) {
  return os << '(' << q.r << ", " << q.i << ", " << q.j << ", " << q.k << ')';
}

using Quaternion = BasicQuaternion<double>;
using Quaternionf = BasicQuaternion<float>;

}  // namespace qot
