// Command-line front end: synth, train, eval, count, gradcheck, export-features.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "qot/core/error.hpp"
#include "qot/harness/accounting.hpp"
#include "qot/harness/certify.hpp"
#include "qot/harness/checkpoint.hpp"
#include "qot/harness/config.hpp"
#include "qot/harness/dataset.hpp"
#include "qot/harness/tensor_io.hpp"
#include "qot/harness/train.hpp"

namespace fs = std::filesystem;
using namespace qot;
using namespace qot::harness;

namespace {

/// A manifest path, or a directory holding `<split>.tsv`.
fs::path manifest_path(const std::string& data, const char* split) {
  const fs::path p(data);
  return fs::is_directory(p) ? p / (std::string(split) + ".tsv") : p;
}

struct Options {
  std::string config = "desk";
  std::string data;
  std::string out;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::string stage = "both";
  std::size_t classes = 7;
  std::size_t per_class = 100;
  std::size_t test_per_class = 100;
  std::size_t threads = 1;
};

void apply_overrides(RunConfig& run, const Options& o) {
  if (o.seed) run.train.seed = *o.seed;
  if (o.lambda) run.train.lambda = *o.lambda;
  if (o.lr) run.train.lr = *o.lr;
  if (o.epochs) run.train.epochs_ortho = run.train.epochs_qvit = *o.epochs;
  run.validate();
}

int cmd_synth(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(0);
  const auto train = synth_split(o.out, "train", {o.classes, o.per_class, seed, 0.1});
  const auto test = synth_split(o.out, "test", {o.classes, o.test_per_class, seed + 1, 0.1});
  std::cout << "wrote " << train.string() << " (" << o.classes * o.per_class << " samples) and " << test.string()
            << " (" << o.classes * o.test_per_class << " samples)\n";
  return 0;
}

int cmd_train(const Options& o) {
  const Stage stage = parse_stage(o.stage);
  std::optional<LoadedCheckpoint> resumed;
  RunConfig run;
  if (!o.checkpoint.empty()) {
    resumed.emplace(load_checkpoint(o.checkpoint));
    run = resumed->run;
  } else {
    run = load_config(o.config);
  }
  apply_overrides(run, o);
  const Dataset data = load_dataset(manifest_path(o.data, "train"), run.model.qvit.num_classes, run.model.input_shape());
  Model model = resumed ? resumed->model : Model(run.model, run.train.seed);
  const TrainResult r = train(model, run, data, stage, &std::cout, resumed ? resumed->step : 0);
  save_checkpoint(o.out, model, run, r.steps);
  std::cerr << "saved " << o.out << " after " << r.steps << " steps\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  const Dataset data =
      load_dataset(manifest_path(o.data, "test"), ck.run.model.qvit.num_classes, ck.run.model.input_shape());
  const EvalResult r = evaluate(ck.model, data, o.threads);
  std::printf("accuracy\t%.4f\t(%zu samples)\n", r.accuracy(), r.matrix.total());
  std::cout << r.matrix.to_text();
  return 0;
}

int cmd_count(const Options& o) {
  const RunConfig run = load_config(o.config);
  const auto& q = run.model.qvit;
  const CostReport quat = count_flops(q, {q.height, q.width, q.channels, 4}, ModelKind::Quaternion);
  const CostReport real = cost_report(q, ModelKind::Real);
  std::cout << quat.to_text();
  std::printf("real-valued counterpart\tparams=%.2fM\tflops=%.2fM\tparam ratio=%.3f\n", real.total_params() / 1e6,
              real.total_flops() / 1e6,
              static_cast<double>(quat.total_params()) / static_cast<double>(real.total_params()));
  return 0;
}

int cmd_gradcheck() {
  bool all = true;
  for (const auto& op : certification_suite()) {
    const bool pass = op.report.passed();
    all = all && pass;
    std::printf("%s\t%.3e\t%s\n", op.name.c_str(), op.report.max_rel_err(), pass ? "PASS" : "FAIL");
    if (!pass) std::cout << op.report.to_text();
  }
  return all ? 0 : 1;
}

int cmd_export(const Options& o) {
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  const fs::path manifest = manifest_path(o.data, "test");
  const Dataset data = load_dataset(manifest, ck.run.model.qvit.num_classes, ck.run.model.input_shape());
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw IoError("cannot create " + o.out + ": " + ec.message());
  std::vector<Sample> out;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const fs::path rel = "q" + std::to_string(n) + ".qt";
    write_tensor_file(fs::path(o.out) / rel, ck.model.features(data.images[n]).base());
    out.push_back({rel, data.labels[n]});
  }
  write_file(fs::path(o.out) / "features.tsv", format_manifest(out));
  std::cout << "wrote " << out.size() << " quaternion feature maps to " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternion orthogonal transformer: data, training, evaluation and accounting"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic blob dataset (train.tsv, test.tsv)");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--classes", o.classes, "Number of classes")->check(CLI::Range(2, 1000));
  synth->add_option("--per-class", o.per_class, "Training images per class");
  synth->add_option("--test-per-class", o.test_per_class, "Test images per class");

  auto* train = app.add_subcommand("train", "Train and write a checkpoint; one log line per epoch");
  train->add_option("--config", o.config, "Preset (default, paper, desk) or config file")->capture_default_str();
  train->add_option("--data", o.data, "Training manifest, or a directory holding train.tsv")->required();
  train->add_option("--out", o.out, "Checkpoint to write")->required();
  train->add_option("--checkpoint", o.checkpoint, "Resume from this checkpoint (its config wins over --config)");
  train->add_option("--seed", o.seed, "Seed for initialization and data order");
  train->add_option("--lambda", o.lambda, "Weight of the orthogonal loss");
  train->add_option("--epochs", o.epochs, "Epochs for each stage");
  train->add_option("--lr", o.lr, "Learning rate");
  train->add_option("--stage", o.stage, "Which stages to run")
      ->check(CLI::IsMember({"ortho", "qvit", "joint", "both"}))
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Accuracy and confusion matrix of a checkpoint");
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint to evaluate")->required();
  eval->add_option("--data", o.data, "Test manifest, or a directory holding test.tsv")->required();
  eval->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* count = app.add_subcommand("count", "Parameters and FLOPs per layer for a config");
  count->add_option("--config", o.config, "Preset (default, paper, desk) or config file");

  auto* gradcheck = app.add_subcommand("gradcheck", "Central-difference certification of every differentiable op");

  auto* exportf = app.add_subcommand("export-features", "Write quaternion feature maps for a dataset");
  exportf->add_option("--checkpoint", o.checkpoint, "Checkpoint providing backbone and head")->required();
  exportf->add_option("--data", o.data, "Manifest, or a directory holding test.tsv")->required();
  exportf->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*count) {
      if (count->count("--config") == 0) o.config = "default";
      return cmd_count(o);
    }
    if (*gradcheck) return cmd_gradcheck();
    if (*exportf) return cmd_export(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
