#pragma once

// Data-parallel inner loops used by the Krylov layer.
//
// Every kernel has a scalar reference implementation. SIMD variants (AVX2+FMA
// on x86-64, NEON on AArch64) are compiled into separate translation units and
// selected once at runtime from the CPU feature set. The scalar path can be
// forced with force_backend() or by setting FSI_KERNELS=scalar.

#include <cstddef>
#include <span>
#include <string_view>

#include "fsi/common.hpp"

namespace fsi::kernels {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b);

/// Backend currently used by the dispatching entry points below.
Backend active_backend();

/// True if the backend was compiled in and the running CPU supports it.
bool backend_available(Backend b);

/// Overrides runtime selection. Throws fsi::Error if `b` is unavailable.
void force_backend(Backend b);

double dot(std::span<const double> x, std::span<const double> y);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
double nrm2(std::span<const double> x);
/// y = A x for CSR storage with `rows` rows.
void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y);

// Fixed-backend variants, exposed for equivalence testing.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y);
}  // namespace avx2

namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y);
}  // namespace neon

}  // namespace fsi::kernels
