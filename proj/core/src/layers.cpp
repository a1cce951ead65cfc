#include "matnet/layers.hpp"

#include <cmath>

namespace matnet {

Mat1Params Mat1Params::create(int in_rows, int in_cols, int out_rows, int out_cols,
                              std::mt19937_64& rng) {
  Mat1Params p;
  p.U = glorot_uniform(in_rows, out_rows, rng);
  p.V = glorot_uniform(in_cols, out_cols, rng);
  p.B = Matrix(out_rows, out_cols);
  return p;
}

Mat1Params Mat1Params::zeros(int in_rows, int in_cols, int out_rows, int out_cols) {
  Mat1Params p;
  p.U = Matrix(in_rows, out_rows);
  p.V = Matrix(in_cols, out_cols);
  p.B = Matrix(out_rows, out_cols);
  return p;
}

Mat2Params Mat2Params::create(int p_rows, int p_cols, int q_rows, int q_cols,
                              int out_rows, int out_cols, std::mt19937_64& rng) {
  Mat2Params p;
  p.Up = glorot_uniform(p_rows, out_rows, rng);
  p.Vp = glorot_uniform(p_cols, out_cols, rng);
  p.Uq = glorot_uniform(q_rows, out_rows, rng);
  p.Vq = glorot_uniform(q_cols, out_cols, rng);
  p.B = Matrix(out_rows, out_cols);
  return p;
}

Mat2Params Mat2Params::zeros(int p_rows, int p_cols, int q_rows, int q_cols,
                             int out_rows, int out_cols) {
  Mat2Params p;
  p.Up = Matrix(p_rows, out_rows);
  p.Vp = Matrix(p_cols, out_cols);
  p.Uq = Matrix(q_rows, out_rows);
  p.Vq = Matrix(q_cols, out_cols);
  p.B = Matrix(out_rows, out_cols);
  return p;
}

TensorMapParams TensorMapParams::create(int maps, int in_rows, int in_cols,
                                        int out_rows, int out_cols,
                                        std::mt19937_64& rng) {
  TensorMapParams p;
  p.u_maps.reserve(maps);
  p.v_maps.reserve(maps);
  for (int m = 0; m < maps; ++m) {
    p.u_maps.push_back(glorot_uniform(in_rows, out_rows, rng));
    p.v_maps.push_back(glorot_uniform(in_cols, out_cols, rng));
  }
  return p;
}

std::size_t TensorMapParams::parameter_total() const {
  std::size_t n = 0;
  for (const Matrix& m : u_maps) n += m.size();
  for (const Matrix& m : v_maps) n += m.size();
  return n;
}

TensorMapNodes Binder::bind(TensorMapParams& p) {
  TensorMapNodes n;
  n.u_maps.reserve(p.u_maps.size());
  n.v_maps.reserve(p.v_maps.size());
  for (Matrix& m : p.u_maps) n.u_maps.push_back((*this)(m));
  for (Matrix& m : p.v_maps) n.v_maps.push_back((*this)(m));
  return n;
}

std::vector<Matrix> Binder::grads() const {
  std::vector<Matrix> out;
  out.reserve(slots_.size());
  for (const Slot& s : slots_) out.push_back(tape_->grad(s.node));
  return out;
}

NodeId mat1(Tape& t, NodeId x, const Mat1Nodes& p) {
  return t.add(t.matmul(t.matmul(t.transpose(p.U), x), p.V), p.B);
}

Matrix mat1_eval(const Matrix& x, const Mat1Params& p) {
  return add(matmul(matmul(transpose(p.U), x), p.V), p.B);
}

NodeId mat2(Tape& t, NodeId p_in, NodeId q_in, const Mat2Nodes& p) {
  NodeId lhs = t.matmul(t.matmul(t.transpose(p.Up), p_in), p.Vp);
  NodeId rhs = t.matmul(t.matmul(t.transpose(p.Uq), q_in), p.Vq);
  return t.add(t.add(lhs, rhs), p.B);
}

Matrix mat2_eval(const Matrix& p_in, const Matrix& q_in, const Mat2Params& p) {
  Matrix lhs = matmul(matmul(transpose(p.Up), p_in), p.Vp);
  Matrix rhs = matmul(matmul(transpose(p.Uq), q_in), p.Vq);
  return add(add(lhs, rhs), p.B);
}

NodeId ffn_layer(Tape& t, NodeId x, const Mat1Nodes& p, Activation act) {
  return t.activation(mat1(t, x, p), act);
}

Matrix ffn_layer_eval(const Matrix& x, const Mat1Params& p, Activation act) {
  return apply_activation(mat1_eval(x, p), act);
}

ParameterCount parameter_count(int in_rows, int in_cols, int out_rows, int out_cols) {
  if (in_rows < 1 || in_cols < 1 || out_rows < 1 || out_cols < 1) {
    throw ValueError("parameter_count: dims must be >= 1");
  }
  auto r1 = static_cast<std::uint64_t>(in_rows);
  auto c1 = static_cast<std::uint64_t>(in_cols);
  auto r2 = static_cast<std::uint64_t>(out_rows);
  auto c2 = static_cast<std::uint64_t>(out_cols);
  ParameterCount pc;
  pc.matrix_count = r1 * r2 + c1 * c2 + r2 * c2;
  pc.vector_count = r1 * c1 * r2 * c2 + r2 * c2;
  return pc;
}

DenseEquivalent expand_to_dense(const Mat1Params& p) {
  const int in_rows = p.U.rows(), out_rows = p.U.cols();
  const int in_cols = p.V.rows(), out_cols = p.V.cols();
  DenseEquivalent d{Matrix(in_rows * in_cols, out_rows * out_cols), vectorize(p.B)};
  for (int i = 0; i < out_rows; ++i) {
    for (int j = 0; j < out_cols; ++j) {
      const int k = i * out_cols + j;
      // column k is the row-major flattening of outer(U[:,i], V[:,j])
      for (int r = 0; r < in_rows; ++r)
        for (int c = 0; c < in_cols; ++c)
          d.W(r * in_cols + c, k) = p.U(r, i) * p.V(c, j);
    }
  }
  return d;
}

NodeId highway_block(Tape& t, NodeId h_prev, const Mat1Nodes& gate,
                     const Mat1Nodes& cand, Activation act) {
  NodeId z = t.sigmoid(mat1(t, h_prev, gate));
  NodeId h_cand = t.activation(mat1(t, h_prev, cand), act);
  NodeId keep = t.sub(h_prev, t.hadamard(z, h_prev));  // (1-Z) (.) H
  return t.add(keep, t.hadamard(z, h_cand));
}

Matrix highway_block_eval(const Matrix& h_prev, const Mat1Params& gate,
                          const Mat1Params& cand, Activation act) {
  Matrix z = sigmoid(mat1_eval(h_prev, gate));
  Matrix h_cand = apply_activation(mat1_eval(h_prev, cand), act);
  return add(sub(h_prev, hadamard(z, h_prev)), hadamard(z, h_cand));
}

NodeId resnet_block(Tape& t, NodeId h_prev,
                    const std::function<NodeId(Tape&, NodeId)>& residual_subnet) {
  NodeId f = residual_subnet(t, h_prev);
  if (!t.value(f).same_shape(t.value(h_prev))) {
    throw ShapeError("resnet_block: residual output " + t.value(f).shape_str() +
                     " does not match input " + t.value(h_prev).shape_str());
  }
  return t.add(h_prev, f);
}

NodeId tensor_matrix_map(Tape& t, const std::vector<NodeId>& x_maps,
                         const TensorMapNodes& p) {
  if (x_maps.size() != p.u_maps.size() || x_maps.size() != p.v_maps.size()) {
    throw ShapeError("tensor_matrix_map: input has " + std::to_string(x_maps.size()) +
                     " maps, parameters expect " + std::to_string(p.u_maps.size()));
  }
  std::vector<NodeId> terms;
  terms.reserve(x_maps.size());
  for (std::size_t m = 0; m < x_maps.size(); ++m) {
    terms.push_back(
        t.matmul(t.matmul(t.transpose(p.u_maps[m]), x_maps[m]), p.v_maps[m]));
  }
  return terms.size() == 1 ? terms[0] : t.add_n(terms);
}

Matrix tensor_matrix_map_eval(const Tensor3& x, const TensorMapParams& p) {
  if (x.maps() != p.maps()) {
    throw ShapeError("tensor_matrix_map: input has " + std::to_string(x.maps()) +
                     " maps, parameters expect " + std::to_string(p.maps()));
  }
  Matrix acc = matmul(matmul(transpose(p.u_maps[0]), x.map(0)), p.v_maps[0]);
  for (int m = 1; m < x.maps(); ++m) {
    acc = add(acc, matmul(matmul(transpose(p.u_maps[m]), x.map(m)), p.v_maps[m]));
  }
  return acc;
}

static void validate_simplex_columns(const Matrix& alphas, double tol) {
  for (int j = 0; j < alphas.cols(); ++j) {
    double s = 0.0;
    for (int i = 0; i < alphas.rows(); ++i) {
      double a = alphas(i, j);
      if (a < -tol) {
        throw ValueError("attention_read: negative weight " + std::to_string(a) +
                         " in read column " + std::to_string(j));
      }
      s += a;
    }
    if (std::fabs(s - 1.0) > tol) {
      throw ValueError("attention_read: read column " + std::to_string(j) +
                       " sums to " + std::to_string(s) + ", expected 1");
    }
  }
}

Matrix attention_read(const Matrix& p, const Matrix& alphas, double tol) {
  if (alphas.rows() != p.rows()) {
    throw ShapeError("attention_read: weights cover " + std::to_string(alphas.rows()) +
                     " rows, matrix has " + std::to_string(p.rows()));
  }
  validate_simplex_columns(alphas, tol);
  return matmul(transpose(alphas), p);
}

NodeId attention_read(Tape& t, NodeId p, NodeId alphas, double tol) {
  if (t.value(alphas).rows() != t.value(p).rows()) {
    throw ShapeError("attention_read: weights cover " +
                     std::to_string(t.value(alphas).rows()) + " rows, matrix has " +
                     std::to_string(t.value(p).rows()));
  }
  validate_simplex_columns(t.value(alphas), tol);
  return t.matmul(t.transpose(alphas), p);
}

BatchNorm::BatchNorm(int rows, int cols, double eps, double momentum)
    : gamma(Matrix::ones(rows, cols)),
      beta(Matrix(rows, cols)),
      running_mean(Matrix(rows, cols)),
      running_var(Matrix::ones(rows, cols)),
      eps_(eps),
      momentum_(momentum) {
  if (eps <= 0.0) throw ValueError("batch_norm: eps must be > 0");
}

void BatchNorm::update_running(const Matrix& mean, const Matrix& var) {
  if (!stats_initialized_) {
    running_mean = mean;
    running_var = var;
    stats_initialized_ = true;
    return;
  }
  running_mean = add(scale(running_mean, 1.0 - momentum_), scale(mean, momentum_));
  running_var = add(scale(running_var, 1.0 - momentum_), scale(var, momentum_));
}

std::vector<NodeId> BatchNorm::forward_train(Tape& t, Binder& b,
                                             const std::vector<NodeId>& batch) {
  if (batch.empty()) throw ValueError("batch_norm: empty batch in training mode");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  NodeId mean = t.scale(batch.size() == 1 ? batch[0] : t.add_n(batch), inv_n);
  std::vector<NodeId> sq;
  sq.reserve(batch.size());
  std::vector<NodeId> centered;
  centered.reserve(batch.size());
  for (NodeId x : batch) {
    NodeId c = t.sub(x, mean);
    centered.push_back(c);
    sq.push_back(t.hadamard(c, c));
  }
  NodeId var = t.scale(sq.size() == 1 ? sq[0] : t.add_n(sq), inv_n);
  NodeId denom = t.inv_sqrt_eps(var, eps_);

  NodeId g = b(gamma);
  NodeId be = b(beta);
  std::vector<NodeId> out;
  out.reserve(batch.size());
  for (NodeId c : centered) {
    out.push_back(t.add(t.hadamard(g, t.hadamard(c, denom)), be));
  }
  update_running(t.value(mean), t.value(var));
  return out;
}

std::vector<Matrix> BatchNorm::eval_train_mode(const std::vector<Matrix>& batch) {
  if (batch.empty()) throw ValueError("batch_norm: empty batch in training mode");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Matrix mean(batch[0].rows(), batch[0].cols());
  for (const Matrix& x : batch) mean = add(mean, x);
  mean = scale(mean, inv_n);
  Matrix var(mean.rows(), mean.cols());
  for (const Matrix& x : batch) {
    Matrix c = sub(x, mean);
    var = add(var, hadamard(c, c));
  }
  var = scale(var, inv_n);
  std::vector<Matrix> out;
  out.reserve(batch.size());
  for (const Matrix& x : batch) {
    Matrix c = sub(x, mean);
    Matrix y(c.rows(), c.cols());
    for (std::size_t i = 0; i < c.size(); ++i) {
      y.raw()[i] = gamma.raw()[i] * c.raw()[i] / std::sqrt(var.raw()[i] + eps_) +
                   beta.raw()[i];
    }
    out.push_back(std::move(y));
  }
  update_running(mean, var);
  return out;
}

NodeId BatchNorm::forward_eval(Tape& t, Binder& b, NodeId x) {
  NodeId mean = t.constant(running_mean);
  NodeId denom = t.inv_sqrt_eps(t.constant(running_var), eps_);
  NodeId g = b(gamma);
  NodeId be = b(beta);
  return t.add(t.hadamard(g, t.hadamard(t.sub(x, mean), denom)), be);
}

Matrix BatchNorm::eval(const Matrix& x) const {
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y.raw()[i] = gamma.raw()[i] * (x.raw()[i] - running_mean.raw()[i]) /
                     std::sqrt(running_var.raw()[i] + eps_) +
                 beta.raw()[i];
  }
  return y;
}

static Matrix dropout_mask(int rows, int cols, double rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(rows, cols);
  for (double& v : mask.raw()) v = unit(rng) < rate ? 0.0 : keep_scale;
  return mask;
}

Matrix dropout(const Matrix& x, double rate, std::mt19937_64& rng, Mode mode) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ValueError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::eval || rate == 0.0) return x;
  return hadamard(x, dropout_mask(x.rows(), x.cols(), rate, rng));
}

NodeId dropout(Tape& t, NodeId x, double rate, std::mt19937_64& rng, Mode mode) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ValueError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::eval || rate == 0.0) return x;
  const Matrix& v = t.value(x);
  return t.hadamard(x, t.constant(dropout_mask(v.rows(), v.cols(), rate, rng)));
}

}  // namespace matnet
