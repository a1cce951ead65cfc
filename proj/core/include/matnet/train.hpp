#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "matnet/matrix.hpp"

namespace matnet {

struct NamedParam {
  std::string name;
  Matrix* value;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment estimates mirroring the parameter shapes, plus the
// bias-correction step counter.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t t = 0;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one bias-corrected update in place. Gradient shapes must mirror
  // the parameters; moment slots are allocated on first use.
  void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads);

  const AdamConfig& config() const { return cfg_; }
  const AdamState& state() const { return state_; }

 private:
  AdamConfig cfg_;
  AdamState state_;
};

// Cross-entropy of a logit vector against a class id.
struct LossAndGrad {
  double loss;
  Matrix grad;
};
LossAndGrad softmax_cross_entropy(const Matrix& logits, int target);

// Mean of squared entrywise differences.
double mse_loss(const Matrix& pred, const Matrix& target);

// l1 * sum|w| + l2 * sum w^2 over all parameters, with gradients;
// the |w| subgradient at 0 is 0.
struct PenaltyResult {
  double value = 0.0;
  std::vector<Matrix> grads;
};
PenaltyResult weight_penalty(const std::vector<Matrix*>& params, double l1_coef,
                             double l2_coef);

// Adds the penalty gradients into an existing gradient accumulator.
void add_weight_penalty(const std::vector<Matrix*>& params, double l1_coef,
                        double l2_coef, std::vector<Matrix>& grads,
                        double* penalty_value = nullptr);

// Early stopping on validation loss: improvement means strict decrease.
class StoppingRule {
 public:
  explicit StoppingRule(int patience) : patience_(patience) {}

  // Records one validation value; returns true when it improved on the best.
  bool observe(double val_loss);
  bool should_stop() const { return epochs_since_best_ >= patience_; }

  int patience() const { return patience_; }
  double best_val() const { return best_val_; }
  int epochs_since_best() const { return epochs_since_best_; }

 private:
  int patience_;
  double best_val_ = std::numeric_limits<double>::infinity();
  int epochs_since_best_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double metric = 0.0;
  std::int64_t wall_ms = 0;
};

struct TrainRecord {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_loss = 0.0;
};

// One experiment's training surface: an epoch of optimization and a
// validation pass. The task owns its model, data and optimizer.
class TrainableTask {
 public:
  virtual ~TrainableTask() = default;
  virtual double run_train_epoch(std::mt19937_64& rng) = 0;
  // {validation loss, report metric}
  virtual std::pair<double, double> evaluate() = 0;
  virtual std::vector<NamedParam> params() = 0;
};

// Runs up to `max_epochs` epochs with early stopping; the task's parameters
// are restored to the best-validation checkpoint before returning. When
// `measure_time` is false every wall_ms is zero, keeping records
// byte-reproducible.
TrainRecord train_loop(TrainableTask& task, StoppingRule stopping, int max_epochs,
                       std::mt19937_64& rng, bool measure_time = false);

// ---- deterministic batch fan-out ---------------------------------------------

// Worker-thread cap: MATNET_THREADS when set, else hardware concurrency,
// clamped to [1, 8].
int worker_thread_count();

// Evaluates fn(i) for i in [0, n) across worker threads. Each index writes
// only its own output slot, so reductions done afterwards in index order are
// independent of the thread count.
void parallel_for_index(int n, const std::function<void(int)>& fn);

}  // namespace matnet
