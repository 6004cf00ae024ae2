#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qot/harness/config.hpp"
#include "qot/harness/dataset.hpp"
#include "qot/harness/metrics.hpp"
#include "qot/harness/model.hpp"

namespace qot::harness {

/// Both: backbone + head with the combined loss, then the frozen-feature Q-ViT
/// with cross-entropy. Ortho / QViT run one of those stages alone. Joint trains
/// everything at once on Q-ViT cross-entropy + λ·orthogonal loss.
enum class Stage { Both, Ortho, QViT, Joint };

Stage parse_stage(const std::string& name);

struct EpochLog {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;

  /// `epoch<TAB>split<TAB>loss<TAB>accuracy`
  std::string to_line() const;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::uint64_t steps = 0;
};

/// Deterministic for a given config seed: data order comes from a generator
/// seeded by it, and the model is expected to be initialized from it.
/// Each epoch line is also written to `log` when given. A non-finite loss
/// aborts with NumericError naming the first non-finite tensor.
TrainResult train(Model& model, const RunConfig& run, const Dataset& data, Stage stage, std::ostream* log = nullptr,
                  std::uint64_t start_step = 0);

struct EvalResult {
  ConfusionMatrix matrix;
  double accuracy() const { return matrix.accuracy(); }
};

/// Predicts every image; workers > 1 shards the data across threads.
EvalResult evaluate(const Model& model, const Dataset& data, std::size_t workers = 1);

}  // namespace qot::harness
