#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>

namespace qot::kernels {

/// In-place max-subtracted softmax over the middle axis of an
/// [outer × extent × inner] row-major buffer.
template <std::floating_point T>
void softmax_strided(std::span<T> data, std::size_t outer, std::size_t extent, std::size_t inner) {
  for (std::size_t o = 0; o < outer; ++o) {
    T* base = data.data() + o * extent * inner;
    for (std::size_t c = 0; c < inner; ++c) {
      T peak = base[c];
      for (std::size_t e = 1; e < extent; ++e) peak = std::max(peak, base[e * inner + c]);
      T total = 0;
      for (std::size_t e = 0; e < extent; ++e) {
        T& v = base[e * inner + c];
        v = std::exp(v - peak);
        total += v;
      }
      for (std::size_t e = 0; e < extent; ++e) base[e * inner + c] /= total;
    }
  }
}

}  // namespace qot::kernels
