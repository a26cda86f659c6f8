#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gnnbench/matrix.hpp"

namespace gnnbench {

/// Square sparse matrix in compressed-row form. All sparse propagation
/// matrices in this project are symmetric (undirected graphs), which the
/// engine relies on for the spmm backward rule; builders set `symmetric`.
struct SparseMatrix {
  int n = 0;
  std::vector<std::size_t> row_ptr;  // size n+1
  std::vector<int> col_idx;          // sorted within each row
  std::vector<double> vals;
  bool symmetric = false;

  std::size_t nnz() const { return col_idx.size(); }

  void validate() const {
    if (row_ptr.size() != static_cast<std::size_t>(n) + 1)
      throw std::invalid_argument("SparseMatrix: bad row_ptr length");
    if (row_ptr.front() != 0 || row_ptr.back() != col_idx.size())
      throw std::invalid_argument("SparseMatrix: row_ptr does not span col_idx");
    for (int i = 0; i < n; ++i) {
      int prev = -1;
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        if (col_idx[k] < 0 || col_idx[k] >= n)
          throw std::invalid_argument("SparseMatrix: column index out of range");
        if (col_idx[k] <= prev)
          throw std::invalid_argument("SparseMatrix: columns not strictly sorted in row");
        prev = col_idx[k];
        if (!std::isfinite(vals[k]))
          throw std::invalid_argument("SparseMatrix: non-finite value");
      }
    }
  }

  /// Builds from per-row (col, val) lists; each row must be sorted by col.
  static SparseMatrix from_rows(int n, const std::vector<std::vector<std::pair<int, double>>>& rows,
                                bool symmetric) {
    SparseMatrix s;
    s.n = n;
    s.symmetric = symmetric;
    s.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    std::size_t total = 0;
    for (int i = 0; i < n; ++i) {
      s.row_ptr[i] = total;
      total += rows[i].size();
    }
    s.row_ptr[n] = total;
    s.col_idx.reserve(total);
    s.vals.reserve(total);
    for (int i = 0; i < n; ++i)
      for (const auto& [c, v] : rows[i]) {
        s.col_idx.push_back(c);
        s.vals.push_back(v);
      }
    s.validate();
    return s;
  }

  Matrix to_dense() const {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) m(i, col_idx[k]) = vals[k];
    return m;
  }
};

/// y = S * h for dense h (n x c).
inline Matrix spmm_value(const SparseMatrix& s, const Matrix& h) {
  if (s.n != h.rows())
    throw std::invalid_argument("spmm: shape mismatch " + std::to_string(s.n) + "x" +
                                std::to_string(s.n) + " * " + shape_str(h));
  Matrix out(s.n, h.cols());
  const int c = h.cols();
  for (int i = 0; i < s.n; ++i) {
    double* orow = out.row(i);
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
      const double v = s.vals[k];
      const double* hrow = h.row(s.col_idx[k]);
      for (int j = 0; j < c; ++j) orow[j] += v * hrow[j];
    }
  }
  return out;
}

}  // namespace gnnbench
