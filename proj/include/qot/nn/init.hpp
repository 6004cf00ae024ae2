#pragma once

#include <cstdint>
#include <random>

#include "qot/core/tensor.hpp"

namespace qot::nn {

/// Seeded generator shared by every initializer, so a model is a pure function of its seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double stddev) { return std::normal_distribution<double>(mean, stddev)(engine_); }
  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

Tensor uniform_tensor(const Shape& shape, double bound, Rng& rng);
Tensor normal_tensor(const Shape& shape, double stddev, Rng& rng);

/// sqrt(6 / (4·fan_in + 4·fan_out)), applied to each of the four components of
/// every quaternion weight.
double quaternion_glorot_bound(std::size_t fan_in, std::size_t fan_out);

}  // namespace qot::nn
