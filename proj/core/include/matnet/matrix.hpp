#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace matnet {

// Thrown when operand shapes do not line up. The message names both shapes.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown for invalid values (NaN input, out-of-range rates, bad weights...).
class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. The universal value type of the library:
// inputs, hidden states, gates, memory cells and all parameters are matrices.
class Matrix {
 public:
  Matrix() = default;  // empty sentinel, only valid as a container placeholder

  Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  }

  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims(rows, cols);
    if (data_.size() != static_cast<std::size_t>(rows) * cols) {
      throw ShapeError("data length " + std::to_string(data_.size()) +
                       " does not match shape " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }

  static Matrix filled(int rows, int cols, double v) {
    Matrix m(rows, cols);
    m.data_.assign(m.data_.size(), v);
    return m;
  }

  static Matrix ones(int rows, int cols) { return filled(rows, cols, 1.0); }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  // Row-major literal, handy in tests: Matrix::of({{1,2},{3,4}}).
  static Matrix of(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  static void check_dims(int rows, int cols) {
    if (rows < 1 || cols < 1) {
      throw ShapeError("matrix dims must be >= 1, got " + std::to_string(rows) +
                       "x" + std::to_string(cols));
    }
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Stack of `maps` equally shaped matrices, stored row-major per map.
// Holds spectrogram stacks and the factor stacks of the tensor-matrix mapping.
class Tensor3 {
 public:
  Tensor3() = default;

  Tensor3(int maps, int rows, int cols) : maps_(maps), rows_(rows), cols_(cols) {
    if (maps < 1 || rows < 1 || cols < 1) {
      throw ShapeError("tensor dims must be >= 1, got " + std::to_string(maps) +
                       "x" + std::to_string(rows) + "x" + std::to_string(cols));
    }
    data_.assign(static_cast<std::size_t>(maps) * rows * cols, 0.0);
  }

  int maps() const { return maps_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int m, int r, int c) {
    return data_[(static_cast<std::size_t>(m) * rows_ + r) * cols_ + c];
  }
  double operator()(int m, int r, int c) const {
    return data_[(static_cast<std::size_t>(m) * rows_ + r) * cols_ + c];
  }

  Matrix map(int m) const {
    Matrix out(rows_, cols_);
    const double* src = data_.data() + static_cast<std::size_t>(m) * rows_ * cols_;
    std::copy(src, src + static_cast<std::size_t>(rows_) * cols_, out.data());
    return out;
  }

  void set_map(int m, const Matrix& value) {
    if (value.rows() != rows_ || value.cols() != cols_) {
      throw ShapeError("map shape " + value.shape_str() + " does not match tensor slice " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    double* dst = data_.data() + static_cast<std::size_t>(m) * rows_ * cols_;
    std::copy(value.data(), value.data() + value.size(), dst);
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

 private:
  int maps_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { identity, sigmoid, tanh, relu };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

inline double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---- plain (non-recorded) matrix arithmetic -------------------------------

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix apply_activation(const Matrix& a, Activation act);
Matrix sigmoid(const Matrix& a);
Matrix tanh_elem(const Matrix& a);
Matrix relu(const Matrix& a);

double sum(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Numerically stable per-row softmax (max-subtraction). NaN input is rejected.
Matrix row_softmax(const Matrix& a);

// Row-major flattening to a column vector, and its exact inverse.
Matrix vectorize(const Matrix& x);
Matrix matrixize(const Matrix& column, int rows, int cols);

// ---- random initialization -------------------------------------------------

Matrix uniform_matrix(int rows, int cols, double lo, double hi, std::mt19937_64& rng);

// uniform(-a, a) with a = sqrt(6 / (rows + cols)), computed from this
// factor's own two dims.
Matrix glorot_uniform(int rows, int cols, std::mt19937_64& rng);

}  // namespace matnet
