#pragma once

#include <memory>
#include <string>
#include <vector>

#include "matnet/config.hpp"
#include "matnet/data.hpp"
#include "matnet/graph.hpp"
#include "matnet/layers.hpp"
#include "matnet/recurrent.hpp"
#include "matnet/train.hpp"

namespace matnet {

// A runnable experiment: model + data + optimizer built from one config.
class ExperimentTask : public TrainableTask {
 public:
  // Held-out metric reported once at the end (test accuracy where the task
  // keeps a test split, otherwise the best validation metric).
  virtual double held_out_metric() { return 0.0; }
  virtual int steps_per_epoch() const = 0;

  std::uint64_t parameter_total();
};

// Deep matrix feed-forward classifier (optionally gated/residual stacks and
// per-layer batch normalization) with a dense softmax head.
class FfnClassifyTask : public ExperimentTask {
 public:
  explicit FfnClassifyTask(const ExperimentConfig& cfg);
  double run_train_epoch(std::mt19937_64& rng) override;
  std::pair<double, double> evaluate() override;
  std::vector<NamedParam> params() override;
  double held_out_metric() override;
  int steps_per_epoch() const override;

  // Eval-mode error rate on the training split.
  double train_error();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Denoising matrix autoencoder trained to reconstruct clean images from
// masked or noisy inputs, with optional L1/L2 weight penalties.
class AutoencoderTask : public ExperimentTask {
 public:
  explicit AutoencoderTask(const ExperimentConfig& cfg);
  double run_train_epoch(std::mt19937_64& rng) override;
  std::pair<double, double> evaluate() override;
  std::vector<NamedParam> params() override;
  int steps_per_epoch() const override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Matrix-recurrent encoder-decoder predicting the tail frames of a sequence
// from its head; the decoder runs open-loop on zero inputs.
class Seq2SeqTask : public ExperimentTask {
 public:
  explicit Seq2SeqTask(const ExperimentConfig& cfg);
  double run_train_epoch(std::mt19937_64& rng) override;
  std::pair<double, double> evaluate() override;
  std::vector<NamedParam> params() override;
  int steps_per_epoch() const override;

  // Mean squared reconstruction error over the validation split.
  double validation_mse();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Matrix-recurrent classifier over spectrogram frame sequences, optionally
// front-ended by a tensor-to-matrix projection of banded frames.
class SpectrogramClassifyTask : public ExperimentTask {
 public:
  explicit SpectrogramClassifyTask(const ExperimentConfig& cfg);
  double run_train_epoch(std::mt19937_64& rng) override;
  std::pair<double, double> evaluate() override;
  std::vector<NamedParam> params() override;
  double held_out_metric() override;  // test accuracy
  int steps_per_epoch() const override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Column-style node classifier: input projection, several rounds of neighbor
// aggregation (mean or multi-head attention over sampled neighborhoods) and
// gated updates, then a per-node softmax head.
class GraphNodesTask : public ExperimentTask {
 public:
  explicit GraphNodesTask(const ExperimentConfig& cfg);
  double run_train_epoch(std::mt19937_64& rng) override;
  std::pair<double, double> evaluate() override;
  std::vector<NamedParam> params() override;
  double held_out_metric() override;  // test accuracy
  int steps_per_epoch() const override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

std::unique_ptr<ExperimentTask> make_task(const ExperimentConfig& cfg);

// ---- runner and reporting -----------------------------------------------------

struct RunResult {
  TrainRecord record;
  std::uint64_t param_total = 0;
  double final_metric = 0.0;
  std::string metrics_path;
  std::string model_path;
};

// Executes the configured experiment, writing `<run_name>.metrics.jsonl` and
// `<run_name>.model.bin` under out_dir. param-count configs only report.
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                         const std::string& run_name);

void write_metrics_file(const std::string& path, const std::string& run_name,
                        const ExperimentConfig& cfg, std::uint64_t param_total,
                        const TrainRecord& record);

struct RunSummary {
  std::string run;
  std::string experiment;
  int epochs = 0;
  double best_val_loss = 0.0;
  double best_metric = 0.0;
  std::uint64_t param_count = 0;
  bool has_records = false;
};

// Parses one metrics file; malformed records raise ParseError naming the line.
RunSummary summarize_metrics_file(const std::string& path);

// Rows sorted by best validation loss; fixed column order.
std::string report_table(std::vector<RunSummary> runs);
std::string report_csv(std::vector<RunSummary> runs);

}  // namespace matnet
