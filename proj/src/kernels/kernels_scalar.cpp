#include "fsi/kernels/kernels.hpp"

namespace fsi::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y) {
  for (Index i = 0; i < rows; ++i) {
    double s = 0.0;
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += values[p] * x[col_idx[p]];
    y[i] = s;
  }
}

}  // namespace fsi::kernels::scalar
