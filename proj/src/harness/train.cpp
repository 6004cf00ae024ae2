#include "qot/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "qot/core/error.hpp"
#include "qot/harness/optim.hpp"

namespace qot::harness {

Stage parse_stage(const std::string& name) {
  if (name == "both") return Stage::Both;
  if (name == "ortho") return Stage::Ortho;
  if (name == "qvit") return Stage::QViT;
  if (name == "joint") return Stage::Joint;
  throw ContractError("unknown stage '" + name + "' (expected ortho, qvit, joint or both)");
}

std::string EpochLog::to_line() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu\t%s\t%.6f\t%.4f", epoch, split.c_str(), loss, accuracy);
  return buf;
}

namespace {

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& t, nn::ParamList params) {
  if (t.optimizer == Optim::Sgd) return std::make_unique<Sgd>(std::move(params), SgdHyper{t.lr, t.momentum});
  return std::make_unique<Adam>(std::move(params), AdamHyper{.lr = t.lr});
}

/// Name the first parameter or graph value that is not finite.
[[noreturn]] void abort_non_finite(const ag::Var& loss, const nn::ParamList& params, const std::string& where) {
  std::string culprit;
  for (const auto& p : params)
    if (!p.var.value().all_finite()) {
      culprit = "parameter " + p.name;
      break;
    }
  if (culprit.empty()) {
    const ag::Tape tape = ag::Tape::record(loss);
    if (const ag::Node* n = tape.first_non_finite()) culprit = "output of op '" + n->op + "'";
  }
  if (culprit.empty()) culprit = "loss";
  throw NumericError("non-finite loss " + where + "; first non-finite tensor: " + culprit);
}

int predicted_row(const Tensor& logits, std::size_t row, std::size_t classes) {
  const auto v = logits.values();
  return argmax(std::span<const double>(v.data() + row * classes, classes));
}

class Trainer {
public:
  Trainer(Model& model, const RunConfig& run, const Dataset& data, std::ostream* log, std::uint64_t step)
      : model_(model), run_(run), data_(data), log_(log), order_rng_(run.train.seed ^ 0x5eedULL), result_{{}, step} {
    if (data.size() == 0) throw ContractError("training set is empty");
  }

  void ortho_stage() {
    const nn::ParamList params = model_.feature_parameters();
    auto opt = make_optimizer(run_.train, params);
    for (std::size_t e = 1; e <= run_.train.epochs_ortho; ++e) {
      Accum acc;
      for (const auto& batch : batches()) {
        std::vector<ag::Var> feats;
        std::vector<int> labels;
        for (std::size_t i : batch) {
          feats.push_back(model_.backbone_features(ag::Var::constant(data_.images[i])));
          labels.push_back(data_.labels[i]);
        }
        const auto t = ortho::finetune_loss(feats, labels, model_.head, {run_.train.lambda});
        step(*opt, t.total, params, "in stage ortho, epoch " + std::to_string(e));
        acc.add(t.total.value().item(), t.logits.value(), labels, model_.cfg.qvit.num_classes);
      }
      emit({e, "ortho_train", acc.mean_loss(), acc.accuracy()});
    }
  }

  void qvit_stage() {
    std::vector<ag::Var> inputs;
    {
      ag::NoGradGuard guard;
      for (const auto& img : data_.images) inputs.push_back(ag::Var::constant(model_.features(img).base()));
    }
    const nn::ParamList params = model_.qvit_parameters();
    auto opt = make_optimizer(run_.train, params);
    for (std::size_t e = 1; e <= run_.train.epochs_qvit; ++e) {
      Accum acc;
      for (const auto& batch : batches()) {
        std::vector<ag::Var> rows;
        std::vector<int> labels;
        for (std::size_t i : batch) {
          rows.push_back(ag::reshape(model_.qvit.forward(inputs[i]), {1, model_.cfg.qvit.num_classes}));
          labels.push_back(data_.labels[i]);
        }
        const ag::Var logits = ag::concat(rows, 0);
        const ag::Var loss = ag::cross_entropy(logits, labels);
        step(*opt, loss, params, "in stage qvit, epoch " + std::to_string(e));
        acc.add(loss.value().item(), logits.value(), labels, model_.cfg.qvit.num_classes);
      }
      emit({e, "qvit_train", acc.mean_loss(), acc.accuracy()});
    }
  }

  void joint_stage() {
    const nn::ParamList params = model_.parameters();
    auto opt = make_optimizer(run_.train, params);
    const std::size_t epochs = std::max(run_.train.epochs_ortho, run_.train.epochs_qvit);
    for (std::size_t e = 1; e <= epochs; ++e) {
      Accum acc;
      for (const auto& batch : batches()) {
        std::vector<ag::Var> rows;
        std::vector<int> labels;
        ag::Var ortho_sum;
        for (std::size_t i : batch) {
          const ag::Var f = model_.backbone_features(ag::Var::constant(data_.images[i]));
          const ortho::Decomposition d = ortho::decompose(f, model_.head);
          const ag::Var o = ag::orthogonal_loss(d.probs[0], d.probs[1], d.probs[2]);
          ortho_sum = ortho_sum ? ag::add(ortho_sum, o) : o;
          const ag::Var q = ortho::build_quaternion(d.maps[0], d.maps[1], d.maps[2]);
          rows.push_back(ag::reshape(model_.qvit.forward(q), {1, model_.cfg.qvit.num_classes}));
          labels.push_back(data_.labels[i]);
        }
        const ag::Var logits = ag::concat(rows, 0);
        const ag::Var ce = ag::cross_entropy(logits, labels);
        const ag::Var loss = nn::combined_loss(ce, ag::scale(ortho_sum, 1.0 / static_cast<double>(batch.size())),
                                               {run_.train.lambda});
        step(*opt, loss, params, "in joint training, epoch " + std::to_string(e));
        acc.add(loss.value().item(), logits.value(), labels, model_.cfg.qvit.num_classes);
      }
      emit({e, "joint_train", acc.mean_loss(), acc.accuracy()});
    }
  }

  TrainResult result() && { return std::move(result_); }

private:
  struct Accum {
    double loss_sum = 0.0;
    std::size_t batches = 0, correct = 0, seen = 0;

    void add(double loss, const Tensor& logits, const std::vector<int>& labels, std::size_t classes) {
      loss_sum += loss;
      ++batches;
      for (std::size_t r = 0; r < labels.size(); ++r) correct += predicted_row(logits, r, classes) == labels[r];
      seen += labels.size();
    }
    double mean_loss() const { return loss_sum / static_cast<double>(batches); }
    double accuracy() const { return static_cast<double>(correct) / static_cast<double>(seen); }
  };

  std::vector<std::vector<std::size_t>> batches() {
    std::vector<std::size_t> order(data_.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), order_rng_);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t at = 0; at < order.size(); at += run_.train.batch_size)
      out.emplace_back(order.begin() + at, order.begin() + std::min(order.size(), at + run_.train.batch_size));
    return out;
  }

  void step(Optimizer& opt, const ag::Var& loss, const nn::ParamList& params, const std::string& where) {
    if (!std::isfinite(loss.value().item())) abort_non_finite(loss, params, where);
    opt.zero_grad();
    ag::backward(loss);
    opt.step();
    ++result_.steps;
  }

  void emit(EpochLog entry) {
    if (log_) *log_ << entry.to_line() << '\n' << std::flush;
    result_.log.push_back(std::move(entry));
  }

  Model& model_;
  const RunConfig& run_;
  const Dataset& data_;
  std::ostream* log_;
  std::mt19937_64 order_rng_;
  TrainResult result_;
};

}  // namespace

TrainResult train(Model& model, const RunConfig& run, const Dataset& data, Stage stage, std::ostream* log,
                  std::uint64_t start_step) {
  run.validate();
  Trainer t(model, run, data, log, start_step);
  switch (stage) {
    case Stage::Both:
      t.ortho_stage();
      t.qvit_stage();
      break;
    case Stage::Ortho:
      t.ortho_stage();
      break;
    case Stage::QViT:
      t.qvit_stage();
      break;
    case Stage::Joint:
      t.joint_stage();
      break;
  }
  return std::move(t).result();
}

EvalResult evaluate(const Model& model, const Dataset& data, std::size_t workers) {
  const std::size_t K = model.cfg.qvit.num_classes;
  for (int label : data.labels)
    if (label < 0 || static_cast<std::size_t>(label) >= K)
      throw ContractError("label " + std::to_string(label) + " outside [0, " + std::to_string(K) + ")");
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, data.size()));
  std::vector<ConfusionMatrix> parts(workers, ConfusionMatrix(K));
  auto run = [&](std::size_t w) {
    ag::NoGradGuard guard;
    for (std::size_t i = w; i < data.size(); i += workers) {
      const Tensor logits = model.logits(data.images[i]);
      parts[w].add(data.labels[i], predicted_row(logits, 0, K));
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run, w);
  }
  EvalResult r{ConfusionMatrix(K)};
  for (const auto& p : parts) r.matrix.merge(p);
  return r;
}

}  // namespace qot::harness
