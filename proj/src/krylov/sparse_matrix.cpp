#include "fsi/krylov/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "fsi/kernels/kernels.hpp"

namespace fsi::krylov {

CsrMatrix::CsrMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {
  if (rows < 0 || cols < 0) throw Error("CsrMatrix: negative dimension");
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> t) {
  CsrMatrix m(rows, cols);
  for (const auto& e : t) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw Error("CsrMatrix::from_triplets: index out of range");
  }
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.col_idx_.reserve(t.size());
  m.values_.reserve(t.size());
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    while (k < t.size() && t[k].row == i) {
      const Index c = t[k].col;
      double s = 0.0;
      while (k < t.size() && t[k].row == i && t[k].col == c) s += t[k++].value;
      m.col_idx_.push_back(c);
      m.values_.push_back(s);
    }
    m.row_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<Index>(m.col_idx_.size());
  }
  return m;
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  return diagonal(ones);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
  const auto n = static_cast<Index>(d.size());
  CsrMatrix m(n, n);
  m.col_idx_.resize(d.size());
  m.values_.assign(d.begin(), d.end());
  for (Index i = 0; i < n; ++i) {
    m.col_idx_[i] = i;
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

CsrMatrix CsrMatrix::from_csr(Index rows, Index cols, std::vector<Index> row_ptr,
                              std::vector<Index> col_idx, std::vector<double> values) {
  if (row_ptr.size() != static_cast<std::size_t>(rows) + 1 || row_ptr.front() != 0 ||
      static_cast<std::size_t>(row_ptr.back()) != col_idx.size() || col_idx.size() != values.size())
    throw Error("CsrMatrix::from_csr: inconsistent arrays");
  for (Index i = 0; i < rows; ++i) {
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      if (col_idx[p] < 0 || col_idx[p] >= cols) throw Error("CsrMatrix::from_csr: column out of range");
      if (p > row_ptr[i] && col_idx[p] <= col_idx[p - 1])
        throw Error("CsrMatrix::from_csr: columns not strictly increasing");
    }
  }
  CsrMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  return m;
}

double CsrMatrix::at(Index i, Index j) const {
  const auto b = col_idx_.begin() + row_ptr_[i];
  const auto e = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<double> CsrMatrix::diagonal_values() const {
  std::vector<double> d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
  for (Index i = 0; i < static_cast<Index>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(cols_) || y.size() != static_cast<std::size_t>(rows_))
    throw Error("CsrMatrix::multiply: size mismatch");
  kernels::csr_spmv(rows_, row_ptr_.data(), col_idx_.data(), values_.data(), x.data(), y.data());
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(rows_));
  multiply(x, y);
  return y;
}

void CsrMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(rows_) || y.size() != static_cast<std::size_t>(cols_))
    throw Error("CsrMatrix::multiply_transpose: size mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (Index i = 0; i < rows_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) y[col_idx_[p]] += values_[p] * xi;
  }
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t(cols_, rows_);
  t.col_idx_.resize(col_idx_.size());
  t.values_.resize(values_.size());
  for (Index c : col_idx_) ++t.row_ptr_[c + 1];
  for (Index j = 0; j < cols_; ++j) t.row_ptr_[j + 1] += t.row_ptr_[j];
  std::vector<Index> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const Index q = next[col_idx_[p]]++;
      t.col_idx_[q] = i;
      t.values_[q] = values_[p];
    }
  }
  return t;
}

CsrMatrix CsrMatrix::scale_rows(std::span<const double> w) const {
  if (w.size() != static_cast<std::size_t>(rows_)) throw Error("CsrMatrix::scale_rows: size mismatch");
  CsrMatrix m = *this;
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) m.values_[p] *= w[i];
  return m;
}

CsrMatrix CsrMatrix::scaled(double s) const {
  CsrMatrix m = *this;
  for (double& v : m.values_) v *= s;
  return m;
}

CsrMatrix CsrMatrix::submatrix(std::span<const Index> row_set, std::span<const Index> col_set) const {
  std::vector<Index> col_map(static_cast<std::size_t>(cols_), -1);
  for (std::size_t k = 0; k < col_set.size(); ++k) {
    if (col_set[k] < 0 || col_set[k] >= cols_) throw Error("CsrMatrix::submatrix: column out of range");
    col_map[col_set[k]] = static_cast<Index>(k);
  }
  CsrMatrix m(static_cast<Index>(row_set.size()), static_cast<Index>(col_set.size()));
  for (std::size_t k = 0; k < row_set.size(); ++k) {
    const Index i = row_set[k];
    if (i < 0 || i >= rows_) throw Error("CsrMatrix::submatrix: row out of range");
    const std::size_t start = m.col_idx_.size();
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const Index c = col_map[col_idx_[p]];
      if (c < 0) continue;
      m.col_idx_.push_back(c);
      m.values_.push_back(values_[p]);
    }
    // col_set ascending keeps the row sorted; sort anyway for arbitrary sets.
    std::vector<std::pair<Index, double>> row;
    for (std::size_t q = start; q < m.col_idx_.size(); ++q) row.emplace_back(m.col_idx_[q], m.values_[q]);
    std::sort(row.begin(), row.end());
    for (std::size_t q = 0; q < row.size(); ++q) {
      m.col_idx_[start + q] = row[q].first;
      m.values_[start + q] = row[q].second;
    }
    m.row_ptr_[k + 1] = static_cast<Index>(m.col_idx_.size());
  }
  return m;
}

void CsrMatrix::write_coordinate(std::ostream& os) const {
  const auto old = os.precision(17);
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      os << i << ' ' << col_idx_[p] << ' ' << values_[p] << '\n';
  os.precision(old);
}

CsrMatrix add(const CsrMatrix& a, double alpha, const CsrMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("add: dimension mismatch");
  std::vector<Index> rp(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> ci;
  std::vector<double> v;
  ci.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  v.reserve(ci.capacity());
  const auto arp = a.row_ptr(), aci = a.col_idx(), brp = b.row_ptr(), bci = b.col_idx();
  const auto av = a.values(), bv = b.values();
  for (Index i = 0; i < a.rows(); ++i) {
    Index p = arp[i], q = brp[i];
    while (p < arp[i + 1] || q < brp[i + 1]) {
      if (q >= brp[i + 1] || (p < arp[i + 1] && aci[p] < bci[q])) {
        ci.push_back(aci[p]);
        v.push_back(av[p++]);
      } else if (p >= arp[i + 1] || bci[q] < aci[p]) {
        ci.push_back(bci[q]);
        v.push_back(alpha * bv[q++]);
      } else {
        ci.push_back(aci[p]);
        v.push_back(av[p++] + alpha * bv[q++]);
      }
    }
    rp[i + 1] = static_cast<Index>(ci.size());
  }
  return CsrMatrix::from_csr(a.rows(), a.cols(), std::move(rp), std::move(ci), std::move(v));
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw Error("multiply: dimension mismatch");
  std::vector<Index> rp(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> ci;
  std::vector<double> v;
  std::vector<double> acc(static_cast<std::size_t>(b.cols()), 0.0);
  std::vector<Index> mark(static_cast<std::size_t>(b.cols()), -1);
  std::vector<Index> cols;
  const auto arp = a.row_ptr(), aci = a.col_idx(), brp = b.row_ptr(), bci = b.col_idx();
  const auto av = a.values(), bv = b.values();
  for (Index i = 0; i < a.rows(); ++i) {
    cols.clear();
    for (Index p = arp[i]; p < arp[i + 1]; ++p) {
      const Index k = aci[p];
      for (Index q = brp[k]; q < brp[k + 1]; ++q) {
        const Index j = bci[q];
        if (mark[j] != i) {
          mark[j] = i;
          acc[j] = 0.0;
          cols.push_back(j);
        }
        acc[j] += av[p] * bv[q];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (Index j : cols) {
      ci.push_back(j);
      v.push_back(acc[j]);
    }
    rp[i + 1] = static_cast<Index>(ci.size());
  }
  return CsrMatrix::from_csr(a.rows(), b.cols(), std::move(rp), std::move(ci), std::move(v));
}

CsrMatrix weighted_gram(const CsrMatrix& b, std::span<const double> w) {
  return multiply(b.transpose(), b.scale_rows(w));
}

double max_abs_diff(const CsrMatrix& a, const CsrMatrix& b) {
  const CsrMatrix d = add(a, -1.0, b);
  return max_abs(d);
}

double max_abs(const CsrMatrix& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace fsi::krylov
