#include "matnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

namespace matnet {

void Adam::step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam: " + std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " grads");
  }
  if (state_.m.empty()) {
    state_.m.reserve(params.size());
    state_.v.reserve(params.size());
    for (Matrix* p : params) {
      state_.m.emplace_back(p->rows(), p->cols());
      state_.v.emplace_back(p->rows(), p->cols());
    }
  }
  if (state_.m.size() != params.size()) {
    throw ShapeError("adam: parameter list changed size mid-run");
  }
  state_.t += 1;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state_.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state_.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = grads[i];
    if (!p.same_shape(g)) {
      throw ShapeError("adam: grad shape " + g.shape_str() + " != param shape " +
                       p.shape_str());
    }
    Matrix& m = state_.m[i];
    Matrix& v = state_.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g.raw()[k];
      m.raw()[k] = b1 * m.raw()[k] + (1.0 - b1) * gk;
      v.raw()[k] = b2 * v.raw()[k] + (1.0 - b2) * gk * gk;
      const double m_hat = m.raw()[k] / bc1;
      const double v_hat = v.raw()[k] / bc2;
      p.raw()[k] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

LossAndGrad softmax_cross_entropy(const Matrix& logits, int target) {
  if (logits.rows() != 1 && logits.cols() != 1) {
    throw ShapeError("softmax_cross_entropy: logits must be a vector, got " +
                     logits.shape_str());
  }
  const int k = static_cast<int>(logits.size());
  if (target < 0 || target >= k) {
    throw ValueError("softmax_cross_entropy: target " + std::to_string(target) +
                     " out of range for " + std::to_string(k) + " classes");
  }
  double mx = logits.raw()[0];
  for (double v : logits.raw()) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : logits.raw()) z += std::exp(v - mx);
  LossAndGrad out{std::log(z) + mx - logits.raw()[target],
                  Matrix(logits.rows(), logits.cols())};
  for (int i = 0; i < k; ++i) out.grad.raw()[i] = std::exp(logits.raw()[i] - mx) / z;
  out.grad.raw()[target] -= 1.0;
  return out;
}

double mse_loss(const Matrix& pred, const Matrix& target) {
  if (!pred.same_shape(target)) {
    throw ShapeError("mse_loss: shape mismatch " + pred.shape_str() + " vs " +
                     target.shape_str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.raw()[i] - target.raw()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

PenaltyResult weight_penalty(const std::vector<Matrix*>& params, double l1_coef,
                             double l2_coef) {
  if (l1_coef < 0.0 || l2_coef < 0.0) {
    throw ValueError("weight_penalty: coefficients must be >= 0");
  }
  PenaltyResult out;
  out.grads.reserve(params.size());
  for (const Matrix* p : params) {
    Matrix g(p->rows(), p->cols());
    for (std::size_t k = 0; k < p->size(); ++k) {
      const double w = p->raw()[k];
      out.value += l1_coef * std::fabs(w) + l2_coef * w * w;
      double sg = 0.0;
      if (w > 0.0) sg = 1.0;
      else if (w < 0.0) sg = -1.0;
      g.raw()[k] = l1_coef * sg + 2.0 * l2_coef * w;
    }
    out.grads.push_back(std::move(g));
  }
  return out;
}

void add_weight_penalty(const std::vector<Matrix*>& params, double l1_coef,
                        double l2_coef, std::vector<Matrix>& grads,
                        double* penalty_value) {
  if (l1_coef == 0.0 && l2_coef == 0.0) {
    if (penalty_value) *penalty_value = 0.0;
    return;
  }
  PenaltyResult pen = weight_penalty(params, l1_coef, l2_coef);
  if (grads.size() != pen.grads.size()) {
    throw ShapeError("add_weight_penalty: gradient list size mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    grads[i] = add(grads[i], pen.grads[i]);
  }
  if (penalty_value) *penalty_value = pen.value;
}

bool StoppingRule::observe(double val_loss) {
  if (val_loss < best_val_) {
    best_val_ = val_loss;
    epochs_since_best_ = 0;
    return true;
  }
  epochs_since_best_ += 1;
  return false;
}

TrainRecord train_loop(TrainableTask& task, StoppingRule stopping, int max_epochs,
                       std::mt19937_64& rng, bool measure_time) {
  auto params = task.params();
  if (max_epochs < 1) throw ValueError("train_loop: max_epochs must be >= 1");

  std::vector<Matrix> best_snapshot;
  auto snapshot = [&] {
    best_snapshot.clear();
    best_snapshot.reserve(params.size());
    for (const NamedParam& p : params) best_snapshot.push_back(*p.value);
  };

  TrainRecord record;
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double train_loss = task.run_train_epoch(rng);
    const auto [val_loss, metric] = task.evaluate();
    EpochRecord r;
    r.epoch = epoch;
    r.train_loss = train_loss;
    r.val_loss = val_loss;
    r.metric = metric;
    if (measure_time) {
      r.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    }
    record.epochs.push_back(r);
    if (stopping.observe(val_loss)) {
      record.best_epoch = epoch;
      record.best_val_loss = val_loss;
      snapshot();
    }
    if (stopping.should_stop()) break;
  }
  if (!best_snapshot.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) *params[i].value = best_snapshot[i];
  }
  return record;
}

int worker_thread_count() {
  if (const char* env = std::getenv("MATNET_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp(static_cast<int>(hw), 1, 8);
}

void parallel_for_index(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace matnet
