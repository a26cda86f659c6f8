#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnnbench {

/// Dense row-major matrix of 64-bit floats. The only value type the engine
/// computes with; kept deliberately small.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), d_(check_dims(rows, cols), 0.0) {}
  Matrix(int rows, int cols, double fill)
      : rows_(rows), cols_(cols), d_(check_dims(rows, cols), fill) {}

  /// Row-major initializer, e.g. Matrix::of(2, 2, {1, 2, 3, 4}).
  static Matrix of(int rows, int cols, std::initializer_list<double> vals) {
    Matrix m(rows, cols);
    if (vals.size() != m.d_.size()) throw std::invalid_argument("Matrix::of: size mismatch");
    std::size_t i = 0;
    for (double v : vals) m.d_[i++] = v;
    return m;
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return d_.size(); }

  double& operator()(int r, int c) { return d_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return d_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  double* row(int r) { return d_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return d_.data() + static_cast<std::size_t>(r) * cols_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v) { std::fill(d_.begin(), d_.end(), v); }
  void set_zero() { fill(0.0); }

  bool all_finite() const {
    for (double v : d_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && d_ == o.d_;
  }

 private:
  static std::size_t check_dims(int rows, int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> d_;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// C = A * B
inline Matrix matmul_nn(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimension mismatch " + shape_str(a) + " * " +
                                shape_str(b));
  Matrix c(a.rows(), b.cols());
  const int k_dim = a.cols(), n = b.cols();
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int k = 0; k < k_dim; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

/// C = A * B^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: dimension mismatch " + shape_str(a) + " * " +
                                shape_str(b) + "^T");
  Matrix c(a.rows(), b.rows());
  const int k_dim = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < k_dim; ++k) acc += arow[k] * brow[k];
      crow[j] = acc;
    }
  }
  return c;
}

/// C = A^T * B
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("matmul_tn: dimension mismatch " + shape_str(a) + "^T * " +
                                shape_str(b));
  Matrix c(a.cols(), b.cols());
  const int n = b.cols();
  for (int k = 0; k < a.rows(); ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.row(i);
      for (int j = 0; j < n; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

/// a += b * scale
inline void axpy(Matrix& a, const Matrix& b, double scale = 1.0) {
  if (!a.same_shape(b))
    throw std::invalid_argument("axpy: shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += scale * pb[i];
}

}  // namespace gnnbench
