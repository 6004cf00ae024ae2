#include "qot/harness/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "qot/core/error.hpp"

namespace qot::harness {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw ContractError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(int truth, int predicted) {
  for (int v : {truth, predicted})
    if (v < 0 || static_cast<std::size_t>(v) >= k_)
      throw ContractError("label " + std::to_string(v) + " outside [0, " + std::to_string(k_) + ")");
  ++counts_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw ContractError("cannot merge confusion matrices of different sizes");
  for (std::size_t n = 0; n < counts_.size(); ++n) counts_[n] += other.counts_[n];
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  if (n == 0) return 0.0;
  std::size_t trace = 0;
  for (std::size_t k = 0; k < k_; ++k) trace += at(k, k);
  return static_cast<double>(trace) / static_cast<double>(n);
}

std::string ConfusionMatrix::to_text() const {
  std::ostringstream os;
  os << "true\\pred";
  for (std::size_t p = 0; p < k_; ++p) os << '\t' << p;
  os << '\n';
  for (std::size_t t = 0; t < k_; ++t) {
    os << t;
    for (std::size_t p = 0; p < k_; ++p) os << '\t' << at(t, p);
    os << '\n';
  }
  return os.str();
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) throw ContractError("truth and prediction counts differ");
  ConfusionMatrix m(classes);
  for (std::size_t n = 0; n < truth.size(); ++n) m.add(truth[n], predicted[n]);
  return m;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw ContractError("argmax of an empty range");
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace qot::harness
