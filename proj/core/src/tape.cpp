#include "matnet/tape.hpp"

#include <algorithm>
#include <cmath>

namespace matnet {

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
    throw ValueError("tape: node id " + std::to_string(id) + " out of range");
  }
}

NodeId Tape::leaf(Matrix value) {
  Node n;
  n.op = Op::leaf;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

NodeId Tape::constant(Matrix value) {
  Node n;
  n.op = Op::constant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::matmul;
  n.args = {a, b};
  n.value = matnet::matmul(nodes_[a].value, nodes_[b].value);
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
  check_id(a);
  Node n;
  n.op = Op::transpose;
  n.args = {a};
  n.value = matnet::transpose(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::add;
  n.args = {a, b};
  n.value = matnet::add(nodes_[a].value, nodes_[b].value);
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId Tape::add_n(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ValueError("add_n: empty operand list");
  Node n;
  n.op = Op::add_n;
  n.args = xs;
  n.value = nodes_[xs[0]].value;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    check_id(xs[i]);
    n.value = matnet::add(n.value, nodes_[xs[i]].value);
  }
  for (NodeId x : xs) n.needs_grad = n.needs_grad || nodes_[x].needs_grad;
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::sub;
  n.args = {a, b};
  n.value = matnet::sub(nodes_[a].value, nodes_[b].value);
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::hadamard;
  n.args = {a, b};
  n.value = matnet::hadamard(nodes_[a].value, nodes_[b].value);
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
  check_id(a);
  Node n;
  n.op = Op::scale;
  n.args = {a};
  n.aux = s;
  n.value = matnet::scale(nodes_[a].value, s);
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId Tape::activation(NodeId a, Activation act) {
  check_id(a);
  if (act == Activation::identity) return a;
  Node n;
  n.args = {a};
  n.needs_grad = nodes_[a].needs_grad;
  switch (act) {
    case Activation::sigmoid:
      n.op = Op::act_sigmoid;
      n.value = matnet::sigmoid(nodes_[a].value);
      break;
    case Activation::tanh:
      n.op = Op::act_tanh;
      n.value = matnet::tanh_elem(nodes_[a].value);
      break;
    case Activation::relu:
      n.op = Op::act_relu;
      n.value = matnet::relu(nodes_[a].value);
      break;
    default:
      break;
  }
  return push(std::move(n));
}

NodeId Tape::inv_sqrt_eps(NodeId a, double eps) {
  check_id(a);
  Node n;
  n.op = Op::inv_sqrt_eps;
  n.args = {a};
  n.aux = eps;
  n.value = nodes_[a].value;
  for (double& v : n.value.raw()) v = 1.0 / std::sqrt(v + eps);
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId Tape::row_softmax(NodeId a) {
  check_id(a);
  Node n;
  n.op = Op::row_softmax;
  n.args = {a};
  n.value = matnet::row_softmax(nodes_[a].value);
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId Tape::masked_row_softmax(NodeId a, SupportPtr support) {
  check_id(a);
  const Matrix& x = nodes_[a].value;
  if (!support || static_cast<int>(support->size()) != x.rows()) {
    throw ShapeError("masked_row_softmax: support list count does not match rows");
  }
  Node n;
  n.op = Op::masked_row_softmax;
  n.args = {a};
  n.support = support;
  n.value = Matrix(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    const auto& cols = (*support)[i];
    if (cols.empty()) continue;
    double mx = x(i, cols[0]);
    for (int j : cols) mx = std::max(mx, x(i, j));
    double z = 0.0;
    for (int j : cols) {
      n.value(i, j) = std::exp(x(i, j) - mx);
      z += n.value(i, j);
    }
    for (int j : cols) n.value(i, j) /= z;
  }
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, int rows, int cols) {
  check_id(a);
  const Matrix& x = nodes_[a].value;
  if (x.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("reshape: cannot view " + x.shape_str() + " as " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  Node n;
  n.op = Op::reshape;
  n.args = {a};
  n.value = Matrix(rows, cols, x.raw());
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId Tape::vectorize(NodeId a) {
  const Matrix& x = nodes_[a].value;
  return reshape(a, static_cast<int>(x.size()), 1);
}

NodeId Tape::concat_cols(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ValueError("concat_cols: empty operand list");
  int rows = nodes_[xs[0]].value.rows();
  int cols = 0;
  for (NodeId x : xs) {
    check_id(x);
    if (nodes_[x].value.rows() != rows) {
      throw ShapeError("concat_cols: row count mismatch");
    }
    cols += nodes_[x].value.cols();
  }
  Node n;
  n.op = Op::concat_cols;
  n.args = xs;
  n.value = Matrix(rows, cols);
  int off = 0;
  for (NodeId x : xs) {
    const Matrix& v = nodes_[x].value;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < v.cols(); ++j) n.value(i, off + j) = v(i, j);
    off += v.cols();
    n.needs_grad = n.needs_grad || nodes_[x].needs_grad;
  }
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId a) {
  check_id(a);
  Node n;
  n.op = Op::sum_all;
  n.args = {a};
  n.value = Matrix::filled(1, 1, matnet::sum(nodes_[a].value));
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId Tape::mean_sq_err(NodeId pred, NodeId target) {
  check_id(pred);
  check_id(target);
  const Matrix& p = nodes_[pred].value;
  const Matrix& t = nodes_[target].value;
  if (!p.same_shape(t)) {
    throw ShapeError("mean_sq_err: shape mismatch " + p.shape_str() + " vs " + t.shape_str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double d = p.raw()[i] - t.raw()[i];
    acc += d * d;
  }
  Node n;
  n.op = Op::mse;
  n.args = {pred, target};
  n.value = Matrix::filled(1, 1, acc / static_cast<double>(p.size()));
  n.needs_grad = nodes_[pred].needs_grad || nodes_[target].needs_grad;
  return push(std::move(n));
}

NodeId Tape::softmax_xent(NodeId logits, int target) {
  check_id(logits);
  const Matrix& z = nodes_[logits].value;
  if (z.rows() != 1 && z.cols() != 1) {
    throw ShapeError("softmax_xent: logits must be a vector, got " + z.shape_str());
  }
  int k = static_cast<int>(z.size());
  if (target < 0 || target >= k) {
    throw ValueError("softmax_xent: target " + std::to_string(target) +
                     " out of range for " + std::to_string(k) + " classes");
  }
  double mx = z.raw()[0];
  for (double v : z.raw()) mx = std::max(mx, v);
  double lse = 0.0;
  for (double v : z.raw()) lse += std::exp(v - mx);
  lse = std::log(lse) + mx;
  Node n;
  n.op = Op::softmax_xent;
  n.args = {logits};
  n.aux = static_cast<double>(target);
  n.value = Matrix::filled(1, 1, lse - z.raw()[target]);
  n.needs_grad = nodes_[logits].needs_grad;
  return push(std::move(n));
}

NodeId Tape::rows_softmax_xent(NodeId logits, std::vector<int> rows, std::vector<int> labels) {
  check_id(logits);
  const Matrix& z = nodes_[logits].value;
  if (rows.size() != labels.size() || rows.empty()) {
    throw ValueError("rows_softmax_xent: rows/labels must be nonempty and aligned");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    int r = rows[s];
    int y = labels[s];
    if (r < 0 || r >= z.rows()) throw ValueError("rows_softmax_xent: row out of range");
    if (y < 0 || y >= z.cols()) throw ValueError("rows_softmax_xent: label out of range");
    double mx = z(r, 0);
    for (int j = 1; j < z.cols(); ++j) mx = std::max(mx, z(r, j));
    double lse = 0.0;
    for (int j = 0; j < z.cols(); ++j) lse += std::exp(z(r, j) - mx);
    total += std::log(lse) + mx - z(r, y);
  }
  Node n;
  n.op = Op::rows_xent;
  n.args = {logits};
  n.aux_rows = std::move(rows);
  n.aux_labels = std::move(labels);
  n.value = Matrix::filled(1, 1, total / static_cast<double>(n.aux_rows.size()));
  n.needs_grad = nodes_[logits].needs_grad;
  return push(std::move(n));
}

NodeId Tape::neighbor_mean(NodeId h, SupportPtr support) {
  check_id(h);
  const Matrix& x = nodes_[h].value;
  if (!support || static_cast<int>(support->size()) != x.rows()) {
    throw ShapeError("neighbor_mean: support list count does not match rows");
  }
  Node n;
  n.op = Op::neighbor_mean;
  n.args = {h};
  n.support = support;
  n.value = Matrix(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    const auto& nbrs = (*support)[i];
    if (nbrs.empty()) continue;
    double inv = 1.0 / static_cast<double>(nbrs.size());
    for (int j : nbrs)
      for (int c = 0; c < x.cols(); ++c) n.value(i, c) += inv * x(j, c);
  }
  n.needs_grad = nodes_[h].needs_grad;
  return push(std::move(n));
}

void Tape::accumulate(NodeId id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.grad.empty()) {
    n.grad = g;
  } else {
    n.grad = matnet::add(n.grad, g);
  }
}

Matrix Tape::grad(NodeId id) const {
  check_id(id);
  const Node& n = nodes_[id];
  if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(NodeId loss) {
  check_id(loss);
  if (nodes_[loss].value.size() != 1) {
    throw ValueError("backward: loss must be a 1x1 scalar node, got " +
                     nodes_[loss].value.shape_str());
  }
  for (Node& n : nodes_) n.grad = Matrix();
  nodes_[loss].grad = Matrix::filled(1, 1, 1.0);

  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty()) continue;
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::leaf:
      case Op::constant:
        break;
      case Op::matmul: {
        const Matrix& a = nodes_[n.args[0]].value;
        const Matrix& b = nodes_[n.args[1]].value;
        if (nodes_[n.args[0]].needs_grad)
          accumulate(n.args[0], matnet::matmul(g, matnet::transpose(b)));
        if (nodes_[n.args[1]].needs_grad)
          accumulate(n.args[1], matnet::matmul(matnet::transpose(a), g));
        break;
      }
      case Op::transpose:
        accumulate(n.args[0], matnet::transpose(g));
        break;
      case Op::add:
        accumulate(n.args[0], g);
        accumulate(n.args[1], g);
        break;
      case Op::add_n:
        for (NodeId a : n.args) accumulate(a, g);
        break;
      case Op::sub:
        accumulate(n.args[0], g);
        accumulate(n.args[1], matnet::scale(g, -1.0));
        break;
      case Op::hadamard: {
        const Matrix& a = nodes_[n.args[0]].value;
        const Matrix& b = nodes_[n.args[1]].value;
        if (nodes_[n.args[0]].needs_grad) accumulate(n.args[0], matnet::hadamard(g, b));
        if (nodes_[n.args[1]].needs_grad) accumulate(n.args[1], matnet::hadamard(g, a));
        break;
      }
      case Op::scale:
        accumulate(n.args[0], matnet::scale(g, n.aux));
        break;
      case Op::act_sigmoid: {
        Matrix d = g;
        for (std::size_t i = 0; i < d.size(); ++i) {
          double y = n.value.raw()[i];
          d.raw()[i] *= y * (1.0 - y);
        }
        accumulate(n.args[0], d);
        break;
      }
      case Op::act_tanh: {
        Matrix d = g;
        for (std::size_t i = 0; i < d.size(); ++i) {
          double y = n.value.raw()[i];
          d.raw()[i] *= 1.0 - y * y;
        }
        accumulate(n.args[0], d);
        break;
      }
      case Op::act_relu: {
        Matrix d = g;
        const Matrix& x = nodes_[n.args[0]].value;
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (x.raw()[i] <= 0.0) d.raw()[i] = 0.0;  // subgradient at 0 is 0
        }
        accumulate(n.args[0], d);
        break;
      }
      case Op::inv_sqrt_eps: {
        Matrix d = g;
        for (std::size_t i = 0; i < d.size(); ++i) {
          double y = n.value.raw()[i];
          d.raw()[i] *= -0.5 * y * y * y;
        }
        accumulate(n.args[0], d);
        break;
      }
      case Op::row_softmax: {
        const Matrix& y = n.value;
        Matrix d(y.rows(), y.cols());
        for (int i = 0; i < y.rows(); ++i) {
          double dot = 0.0;
          for (int j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
          for (int j = 0; j < y.cols(); ++j) d(i, j) = y(i, j) * (g(i, j) - dot);
        }
        accumulate(n.args[0], d);
        break;
      }
      case Op::masked_row_softmax: {
        const Matrix& y = n.value;
        Matrix d(y.rows(), y.cols());
        for (int i = 0; i < y.rows(); ++i) {
          const auto& cols = (*n.support)[i];
          if (cols.empty()) continue;
          double dot = 0.0;
          for (int j : cols) dot += g(i, j) * y(i, j);
          for (int j : cols) d(i, j) = y(i, j) * (g(i, j) - dot);
        }
        accumulate(n.args[0], d);
        break;
      }
      case Op::reshape: {
        const Matrix& x = nodes_[n.args[0]].value;
        accumulate(n.args[0], Matrix(x.rows(), x.cols(), g.raw()));
        break;
      }
      case Op::concat_cols: {
        int off = 0;
        for (NodeId a : n.args) {
          const Matrix& v = nodes_[a].value;
          if (nodes_[a].needs_grad) {
            Matrix d(v.rows(), v.cols());
            for (int i = 0; i < v.rows(); ++i)
              for (int j = 0; j < v.cols(); ++j) d(i, j) = g(i, off + j);
            accumulate(a, d);
          }
          off += v.cols();
        }
        break;
      }
      case Op::sum_all: {
        const Matrix& x = nodes_[n.args[0]].value;
        accumulate(n.args[0], Matrix::filled(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::mse: {
        const Matrix& p = nodes_[n.args[0]].value;
        const Matrix& t = nodes_[n.args[1]].value;
        double c = 2.0 * g(0, 0) / static_cast<double>(p.size());
        if (nodes_[n.args[0]].needs_grad)
          accumulate(n.args[0], matnet::scale(matnet::sub(p, t), c));
        if (nodes_[n.args[1]].needs_grad)
          accumulate(n.args[1], matnet::scale(matnet::sub(t, p), c));
        break;
      }
      case Op::softmax_xent: {
        const Matrix& z = nodes_[n.args[0]].value;
        Matrix d(z.rows(), z.cols());
        double mx = z.raw()[0];
        for (double v : z.raw()) mx = std::max(mx, v);
        double lse = 0.0;
        for (double v : z.raw()) lse += std::exp(v - mx);
        for (std::size_t i = 0; i < z.size(); ++i)
          d.raw()[i] = std::exp(z.raw()[i] - mx) / lse;
        d.raw()[static_cast<int>(n.aux)] -= 1.0;
        accumulate(n.args[0], matnet::scale(d, g(0, 0)));
        break;
      }
      case Op::rows_xent: {
        const Matrix& z = nodes_[n.args[0]].value;
        Matrix d(z.rows(), z.cols());
        double c = g(0, 0) / static_cast<double>(n.aux_rows.size());
        for (std::size_t s = 0; s < n.aux_rows.size(); ++s) {
          int r = n.aux_rows[s];
          double mx = z(r, 0);
          for (int j = 1; j < z.cols(); ++j) mx = std::max(mx, z(r, j));
          double lse = 0.0;
          for (int j = 0; j < z.cols(); ++j) lse += std::exp(z(r, j) - mx);
          for (int j = 0; j < z.cols(); ++j)
            d(r, j) += c * std::exp(z(r, j) - mx) / lse;
          d(r, n.aux_labels[s]) -= c;
        }
        accumulate(n.args[0], d);
        break;
      }
      case Op::neighbor_mean: {
        const Matrix& x = nodes_[n.args[0]].value;
        Matrix d(x.rows(), x.cols());
        for (int i = 0; i < x.rows(); ++i) {
          const auto& nbrs = (*n.support)[i];
          if (nbrs.empty()) continue;
          double inv = 1.0 / static_cast<double>(nbrs.size());
          for (int j : nbrs)
            for (int c = 0; c < x.cols(); ++c) d(j, c) += inv * g(i, c);
        }
        accumulate(n.args[0], d);
        break;
      }
    }
  }
}

Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f,
                                  const Matrix& x, double h) {
  if (h <= 0.0) throw ValueError("finite_difference_gradient: h must be > 0");
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = probe.raw()[i];
    probe.raw()[i] = orig + h;
    double up = f(probe);
    probe.raw()[i] = orig - h;
    double down = f(probe);
    probe.raw()[i] = orig;
    grad.raw()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace matnet
