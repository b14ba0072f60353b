#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "fsi/common.hpp"

namespace fsi::krylov {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted within each row
/// and unique.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols);

  /// Duplicate (row, col) entries are summed in input order.
  static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
  static CsrMatrix identity(Index n);
  static CsrMatrix diagonal(std::span<const double> d);
  /// Takes ownership of raw CSR arrays; validates sortedness and bounds.
  static CsrMatrix from_csr(Index rows, Index cols, std::vector<Index> row_ptr,
                            std::vector<Index> col_idx, std::vector<double> values);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j) or 0 if not stored.
  double at(Index i, Index j) const;
  std::vector<double> diagonal_values() const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  /// y = A' x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;

  CsrMatrix transpose() const;
  /// Row-scaled copy diag(w) * A.
  CsrMatrix scale_rows(std::span<const double> w) const;
  CsrMatrix scaled(double s) const;
  /// Rows `row_set` and columns `col_set` (both ascending index lists).
  CsrMatrix submatrix(std::span<const Index> row_set, std::span<const Index> col_set) const;

  /// Coordinate text: one `row col value` line per stored entry, 0-based,
  /// 17 significant digits.
  void write_coordinate(std::ostream& os) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// a + alpha * b (union sparsity pattern).
CsrMatrix add(const CsrMatrix& a, double alpha, const CsrMatrix& b);
/// a * b
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);
/// b' diag(w) b, formed explicitly.
CsrMatrix weighted_gram(const CsrMatrix& b, std::span<const double> w);
/// max |a_ij - b_ij| over the union pattern.
double max_abs_diff(const CsrMatrix& a, const CsrMatrix& b);
double max_abs(const CsrMatrix& a);

}  // namespace fsi::krylov
