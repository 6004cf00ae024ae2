#pragma once

#include <span>
#include <string>
#include <vector>

#include "qot/core/tensor.hpp"

namespace qot::harness {

/// Rows are true labels, columns predictions.
class ConfusionMatrix {
public:
  explicit ConfusionMatrix(std::size_t classes);

  /// Throws ContractError if either label is outside [0, K).
  void add(int truth, int predicted);
  void merge(const ConfusionMatrix& other);

  std::size_t classes() const { return k_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  std::size_t total() const;
  /// trace / total; 0 for an empty matrix.
  double accuracy() const;
  std::string to_text() const;

private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

/// Index of the largest entry (first on ties).
int argmax(std::span<const double> values);

}  // namespace qot::harness
