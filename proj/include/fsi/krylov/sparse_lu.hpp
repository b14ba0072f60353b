#pragma once

#include <span>
#include <vector>

#include "fsi/common.hpp"
#include "fsi/krylov/sparse_matrix.hpp"

namespace fsi::krylov {

/// Raised when factorization meets a zero (or numerically negligible) pivot.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(Index pivot, const std::string& what) : Error(what), pivot_(pivot) {}
  /// Elimination step at which no acceptable pivot was found.
  Index pivot() const { return pivot_; }

 private:
  Index pivot_;
};

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of `a`.
std::vector<Index> reverse_cuthill_mckee(const CsrMatrix& a);

/// Left-looking sparse LU with threshold partial pivoting (Gilbert-Peierls).
///
/// Columns are pre-ordered by reverse Cuthill-McKee on the pattern of A + A'.
/// The diagonal entry is preferred as pivot whenever it is within
/// `pivot_threshold` of the largest candidate, so SPD matrices are factored
/// without row exchanges. The factorization is immutable once built and
/// `solve` may be called concurrently.
class SparseLU {
 public:
  explicit SparseLU(const CsrMatrix& a, double pivot_threshold = 0.1);

  Index size() const { return n_; }
  /// Entries stored in L and U together.
  std::size_t factor_nnz() const { return lx_.size() + ux_.size(); }

  void solve(std::span<const double> b, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> b) const;

 private:
  Index n_ = 0;
  std::vector<Index> q_;     // column permutation: step k eliminates column q_[k]
  std::vector<Index> pinv_;  // row i is the pinv_[i]-th pivot row
  // L: unit lower, CSC by step, diagonal stored first.
  std::vector<Index> lp_, li_;
  std::vector<double> lx_;
  // U: CSC by step, diagonal stored last.
  std::vector<Index> up_, ui_;
  std::vector<double> ux_;
};

}  // namespace fsi::krylov
