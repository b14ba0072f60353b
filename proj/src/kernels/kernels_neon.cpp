#include "fsi/kernels/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace fsi::kernels::neon {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y) {
  for (Index i = 0; i < rows; ++i) {
    Index p = row_ptr[i];
    const Index end = row_ptr[i + 1];
    float64x2_t acc = vdupq_n_f64(0.0);
    for (; p + 2 <= end; p += 2) {
      const double g[2] = {x[col_idx[p]], x[col_idx[p + 1]]};
      acc = vfmaq_f64(acc, vld1q_f64(values + p), vld1q_f64(g));
    }
    double s = vaddvq_f64(acc);
    for (; p < end; ++p) s += values[p] * x[col_idx[p]];
    y[i] = s;
  }
}

}  // namespace fsi::kernels::neon

#else

namespace fsi::kernels::neon {
double dot(const double* x, const double* y, std::size_t n) { return scalar::dot(x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { scalar::axpy(a, x, y, n); }
void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y) {
  scalar::csr_spmv(rows, row_ptr, col_idx, values, x, y);
}
}  // namespace fsi::kernels::neon

#endif
