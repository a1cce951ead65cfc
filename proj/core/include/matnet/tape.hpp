#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "matnet/matrix.hpp"

namespace matnet {

using NodeId = int;

// Per-node neighbor lists used by the masked-softmax and mean-aggregation ops.
// Shared so many nodes can reference one structure without copies.
using SupportLists = std::vector<std::vector<int>>;
using SupportPtr = std::shared_ptr<const SupportLists>;

// Reverse-mode autodiff tape. Records every operation in topological order
// together with its cached value; backward() walks the record once in reverse
// and fills a gradient slot per reachable node.
//
// A tape is single-owner: never mutate one from two threads. Independent
// tapes (one per sample) may run concurrently.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. `leaf` participates in gradients, `constant` never does.
  NodeId leaf(Matrix value);
  NodeId constant(Matrix value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId add(NodeId a, NodeId b);
  NodeId add_n(const std::vector<NodeId>& xs);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId activation(NodeId a, Activation act);
  NodeId sigmoid(NodeId a) { return activation(a, Activation::sigmoid); }
  NodeId tanh_elem(NodeId a) { return activation(a, Activation::tanh); }
  NodeId relu(NodeId a) { return activation(a, Activation::relu); }

  // Elementwise 1/sqrt(x + eps); the normalization denominator.
  NodeId inv_sqrt_eps(NodeId a, double eps);

  NodeId row_softmax(NodeId a);

  // Softmax restricted to `support[i]` per row i; zero elsewhere. Rows with
  // empty support come out all-zero.
  NodeId masked_row_softmax(NodeId a, SupportPtr support);

  // Row-major reshape; gradient reshapes back.
  NodeId reshape(NodeId a, int rows, int cols);
  NodeId vectorize(NodeId a);

  NodeId concat_cols(const std::vector<NodeId>& xs);

  // Reductions to a 1x1 node.
  NodeId sum_all(NodeId a);
  NodeId mean_sq_err(NodeId pred, NodeId target);

  // Cross-entropy of a column (or row) of logits against a class id.
  NodeId softmax_xent(NodeId logits, int target);

  // Mean cross-entropy over selected rows of a logits matrix; `labels[k]`
  // is the class for row `rows[k]`.
  NodeId rows_softmax_xent(NodeId logits, std::vector<int> rows, std::vector<int> labels);

  // out[i] = mean of h[j] over j in support[i]; empty support gives a zero row.
  NodeId neighbor_mean(NodeId h, SupportPtr support);

  const Matrix& value(NodeId id) const { return nodes_[id].value; }

  // Backpropagates from a 1x1 loss node through every recorded operation.
  void backward(NodeId loss);

  // Gradient of the last backward() target w.r.t. this node. Zero matrix of
  // the node's shape when the node was not reached.
  Matrix grad(NodeId id) const;

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op {
    leaf,
    constant,
    matmul,
    transpose,
    add,
    add_n,
    sub,
    hadamard,
    scale,
    act_sigmoid,
    act_tanh,
    act_relu,
    inv_sqrt_eps,
    row_softmax,
    masked_row_softmax,
    reshape,
    concat_cols,
    sum_all,
    mse,
    softmax_xent,
    rows_xent,
    neighbor_mean,
  };

  struct Node {
    Op op;
    std::vector<NodeId> args;
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    double aux = 0.0;             // scale factor / eps / target index
    std::vector<int> aux_rows;    // rows_xent row subset
    std::vector<int> aux_labels;  // rows_xent labels
    SupportPtr support;
  };

  NodeId push(Node n);
  void check_id(NodeId id) const;
  void accumulate(NodeId id, const Matrix& g);

  std::vector<Node> nodes_;
};

// Central-difference gradient estimate of a scalar function of a matrix:
// per entry, (f(x + h e) - f(x - h e)) / (2h). The independent oracle that
// every recorded gradient is verified against.
Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f,
                                  const Matrix& x, double h);

}  // namespace matnet
