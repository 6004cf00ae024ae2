#include "qot/nn/init.hpp"

#include <cmath>

namespace qot::nn {

Tensor uniform_tensor(const Shape& shape, double bound, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor normal_tensor(const Shape& shape, double stddev, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.normal(0.0, stddev);
  return t;
}

double quaternion_glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / (4.0 * static_cast<double>(fan_in) + 4.0 * static_cast<double>(fan_out)));
}

}  // namespace qot::nn
