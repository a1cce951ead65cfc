#include "matnet/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace matnet {

Matrix Matrix::of(std::initializer_list<std::initializer_list<double>> rows) {
  int r = static_cast<int>(rows.size());
  int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw ShapeError("ragged rows in matrix literal");
    }
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw ValueError("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "identity";
}

static void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dims differ, " + a.shape_str() + " x " + b.shape_str());
  }
  Matrix out(a.rows(), b.cols());
  const int m = a.rows(), k = a.cols(), n = b.cols();
  for (int i = 0; i < m; ++i) {
    double* out_row = out.data() + static_cast<std::size_t>(i) * n;
    const double* a_row = a.data() + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double aip = a_row[p];
      if (aip == 0.0) continue;
      const double* b_row = b.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] += b.raw()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] -= b.raw()[i];
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] *= b.raw()[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.raw()) v *= s;
  return out;
}

Matrix sigmoid(const Matrix& a) {
  Matrix out = a;
  for (double& v : out.raw()) v = sigmoid_scalar(v);
  return out;
}

Matrix tanh_elem(const Matrix& a) {
  Matrix out = a;
  for (double& v : out.raw()) v = std::tanh(v);
  return out;
}

Matrix relu(const Matrix& a) {
  Matrix out = a;
  for (double& v : out.raw()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix apply_activation(const Matrix& a, Activation act) {
  switch (act) {
    case Activation::identity: return a;
    case Activation::sigmoid: return sigmoid(a);
    case Activation::tanh: return tanh_elem(a);
    case Activation::relu: return relu(a);
  }
  return a;
}

double sum(const Matrix& a) {
  double s = 0.0;
  for (double v : a.raw()) s += v;
  return s;
}

double max_abs(const Matrix& a) {
  double s = 0.0;
  for (double v : a.raw()) s = std::max(s, std::fabs(v));
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s = std::max(s, std::fabs(a.raw()[i] - b.raw()[i]));
  return s;
}

Matrix row_softmax(const Matrix& a) {
  for (double v : a.raw()) {
    if (std::isnan(v)) throw ValueError("row_softmax: NaN input");
  }
  Matrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double mx = a(i, 0);
    for (int j = 1; j < a.cols(); ++j) mx = std::max(mx, a(i, j));
    double z = 0.0;
    for (int j = 0; j < a.cols(); ++j) {
      out(i, j) = std::exp(a(i, j) - mx);
      z += out(i, j);
    }
    for (int j = 0; j < a.cols(); ++j) out(i, j) /= z;
  }
  return out;
}

Matrix vectorize(const Matrix& x) {
  Matrix out(static_cast<int>(x.size()), 1);
  std::copy(x.data(), x.data() + x.size(), out.data());
  return out;
}

Matrix matrixize(const Matrix& column, int rows, int cols) {
  if (column.cols() != 1) {
    throw ShapeError("matrixize: expected a column vector, got " + column.shape_str());
  }
  if (column.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("matrixize: length " + std::to_string(column.size()) +
                     " does not fill " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix out(rows, cols);
  std::copy(column.data(), column.data() + column.size(), out.data());
  return out;
}

Matrix uniform_matrix(int rows, int cols, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.raw()) v = dist(rng);
  return m;
}

Matrix glorot_uniform(int rows, int cols, std::mt19937_64& rng) {
  double a = std::sqrt(6.0 / (rows + cols));
  return uniform_matrix(rows, cols, -a, a, rng);
}

}  // namespace matnet
