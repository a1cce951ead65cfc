#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "matnet/matrix.hpp"
#include "matnet/tape.hpp"

namespace matnet {

// Parameters of the bilinear matrix layer Y = U'XV + B mapping an
// in_rows x in_cols matrix to an out_rows x out_cols one.
//   U : in_rows x out_rows   (row-mapping, mixes rows of X)
//   V : in_cols x out_cols   (column-mapping, mixes columns of X)
//   B : out_rows x out_cols
struct Mat1Params {
  Matrix U, V, B;

  static Mat1Params create(int in_rows, int in_cols, int out_rows, int out_cols,
                           std::mt19937_64& rng);
  static Mat1Params zeros(int in_rows, int in_cols, int out_rows, int out_cols);

  std::size_t parameter_total() const { return U.size() + V.size() + B.size(); }
};

// Two-branch layer Up'P Vp + Uq'Q Vq + B; both branches land on one shape.
struct Mat2Params {
  Matrix Up, Vp, Uq, Vq, B;

  static Mat2Params create(int p_rows, int p_cols, int q_rows, int q_cols,
                           int out_rows, int out_cols, std::mt19937_64& rng);
  static Mat2Params zeros(int p_rows, int p_cols, int q_rows, int q_cols,
                          int out_rows, int out_cols);

  std::size_t parameter_total() const {
    return Up.size() + Vp.size() + Uq.size() + Vq.size() + B.size();
  }
};

// Factor stacks of the tensor-to-matrix projection: one U (in_rows x out_rows)
// and one V (in_cols x out_cols) per input map.
struct TensorMapParams {
  std::vector<Matrix> u_maps;
  std::vector<Matrix> v_maps;

  static TensorMapParams create(int maps, int in_rows, int in_cols, int out_rows,
                                int out_cols, std::mt19937_64& rng);

  int maps() const { return static_cast<int>(u_maps.size()); }
  std::size_t parameter_total() const;
};

// Tape-bound handles for a parameter bundle; produced once per forward pass.
struct Mat1Nodes {
  NodeId U, V, B;
};
struct Mat2Nodes {
  NodeId Up, Vp, Uq, Vq, B;
};
struct TensorMapNodes {
  std::vector<NodeId> u_maps, v_maps;
};

// Records parameter leaves on a tape and remembers them in binding order, so
// gradients can be read back (or accumulated across per-sample tapes) in a
// stable order that matches the parameter list of the owning model.
class Binder {
 public:
  explicit Binder(Tape& tape) : tape_(&tape) {}

  NodeId operator()(Matrix& p) {
    NodeId id = tape_->leaf(p);
    slots_.push_back({&p, id});
    return id;
  }

  Mat1Nodes bind(Mat1Params& p) { return {(*this)(p.U), (*this)(p.V), (*this)(p.B)}; }
  Mat2Nodes bind(Mat2Params& p) {
    return {(*this)(p.Up), (*this)(p.Vp), (*this)(p.Uq), (*this)(p.Vq), (*this)(p.B)};
  }
  TensorMapNodes bind(TensorMapParams& p);

  std::size_t count() const { return slots_.size(); }
  Matrix* source(std::size_t i) const { return slots_[i].source; }
  NodeId node(std::size_t i) const { return slots_[i].node; }

  // Gradients of the bound leaves, in binding order.
  std::vector<Matrix> grads() const;

  Tape& tape() const { return *tape_; }

 private:
  struct Slot {
    Matrix* source;
    NodeId node;
  };
  Tape* tape_;
  std::vector<Slot> slots_;
};

// ---- layer forward passes ---------------------------------------------------

// U'XV + B. Recorded form and a plain evaluation for oracles/inference.
NodeId mat1(Tape& t, NodeId x, const Mat1Nodes& p);
Matrix mat1_eval(const Matrix& x, const Mat1Params& p);

// Up'P Vp + Uq'Q Vq + B.
NodeId mat2(Tape& t, NodeId p_in, NodeId q_in, const Mat2Nodes& p);
Matrix mat2_eval(const Matrix& p_in, const Matrix& q_in, const Mat2Params& p);

// act(mat1(x)).
NodeId ffn_layer(Tape& t, NodeId x, const Mat1Nodes& p, Activation act);
Matrix ffn_layer_eval(const Matrix& x, const Mat1Params& p, Activation act);

// Parameter cost of mapping in_rows x in_cols -> out_rows x out_cols:
// the factored matrix layer against the dense layer on flattened vectors.
struct ParameterCount {
  std::uint64_t matrix_count;
  std::uint64_t vector_count;
};
ParameterCount parameter_count(int in_rows, int in_cols, int out_rows, int out_cols);

// Dense equivalent of a factored layer: W has shape (in_rows*in_cols) x
// (out_rows*out_cols); column i*out_cols + j is the flattened outer product
// of U column i and V column j, so sigma(W'vec(X) + vec(B)) reproduces
// vectorize(sigma(U'XV + B)) under the global row-major flattening.
struct DenseEquivalent {
  Matrix W;
  Matrix bias;  // vec(B), column vector
};
DenseEquivalent expand_to_dense(const Mat1Params& p);

// Gated skip block: Z = sigm(mat1(H, gate)), Hc = act(mat1(H, cand)),
// out = (1-Z) (.) H + Z (.) Hc.
NodeId highway_block(Tape& t, NodeId h_prev, const Mat1Nodes& gate,
                     const Mat1Nodes& cand, Activation act);
Matrix highway_block_eval(const Matrix& h_prev, const Mat1Params& gate,
                          const Mat1Params& cand, Activation act);

// H + F(H); the residual subnet must preserve the shape.
NodeId resnet_block(Tape& t, NodeId h_prev,
                    const std::function<NodeId(Tape&, NodeId)>& residual_subnet);

// Y = sum_i Ui' Xi Vi over the maps of a 3-tensor input.
NodeId tensor_matrix_map(Tape& t, const std::vector<NodeId>& x_maps,
                         const TensorMapNodes& p);
Matrix tensor_matrix_map_eval(const Tensor3& x, const TensorMapParams& p);

// Soft reads over the rows of P: each column of `alphas` is a distribution
// over P's rows; read j yields row j of the output = alphas[:,j]' P.
// Columns are validated to lie on the probability simplex within `tol`.
Matrix attention_read(const Matrix& p, const Matrix& alphas, double tol = 1e-9);
NodeId attention_read(Tape& t, NodeId p, NodeId alphas, double tol = 1e-9);

// ---- batch normalization ----------------------------------------------------

// Normalizes each matrix entry independently across the batch dimension, then
// applies the per-entry affine gamma/beta. Training mode updates running
// statistics with `momentum`; eval mode normalizes with the running values.
class BatchNorm {
 public:
  BatchNorm(int rows, int cols, double eps = 1e-5, double momentum = 0.1);

  // Recorded batch transform (training): all samples must live on one tape.
  std::vector<NodeId> forward_train(Tape& t, Binder& b, const std::vector<NodeId>& batch);

  // Plain batch transform used when no gradients are needed.
  std::vector<Matrix> eval_train_mode(const std::vector<Matrix>& batch);

  // Eval-mode normalization with running statistics; recorded and plain forms.
  NodeId forward_eval(Tape& t, Binder& b, NodeId x);
  Matrix eval(const Matrix& x) const;

  Matrix gamma, beta;
  Matrix running_mean, running_var;
  double eps() const { return eps_; }

 private:
  double eps_;
  double momentum_;
  bool stats_initialized_ = false;
  void update_running(const Matrix& mean, const Matrix& var);
};

// ---- dropout ----------------------------------------------------------------

enum class Mode { train, eval };

// Inverted dropout: zero entries with probability `rate`, scale survivors by
// 1/(1-rate) in training; identity in eval. rate must be in [0, 1).
Matrix dropout(const Matrix& x, double rate, std::mt19937_64& rng, Mode mode);
NodeId dropout(Tape& t, NodeId x, double rate, std::mt19937_64& rng, Mode mode);

}  // namespace matnet
