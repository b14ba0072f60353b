#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "fsi/kernels/kernels.hpp"

namespace fsi::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(FSI_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool cpu_has_neon() {
#if defined(__aarch64__) && defined(__ARM_NEON)
  return true;
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("FSI_KERNELS")) {
    if (std::string(env) == "scalar") return Backend::scalar;
  }
  if (cpu_has_avx2()) return Backend::avx2;
  if (cpu_has_neon()) return Backend::neon;
  return Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: return cpu_has_avx2();
    case Backend::neon: return cpu_has_neon();
  }
  return false;
}

void force_backend(Backend b) {
  if (!backend_available(b))
    throw Error("kernel backend '" + std::string(backend_name(b)) + "' is not available");
  current().store(b, std::memory_order_relaxed);
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("dot: size mismatch");
  switch (active_backend()) {
    case Backend::avx2: return avx2::dot(x.data(), y.data(), x.size());
    case Backend::neon: return neon::dot(x.data(), y.data(), x.size());
    default: return scalar::dot(x.data(), y.data(), x.size());
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw Error("axpy: size mismatch");
  switch (active_backend()) {
    case Backend::avx2: avx2::axpy(a, x.data(), y.data(), x.size()); break;
    case Backend::neon: neon::axpy(a, x.data(), y.data(), x.size()); break;
    default: scalar::axpy(a, x.data(), y.data(), x.size()); break;
  }
}

double nrm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void csr_spmv(Index rows, const Index* row_ptr, const Index* col_idx,
              const double* values, const double* x, double* y) {
  switch (active_backend()) {
    case Backend::avx2: avx2::csr_spmv(rows, row_ptr, col_idx, values, x, y); break;
    case Backend::neon: neon::csr_spmv(rows, row_ptr, col_idx, values, x, y); break;
    default: scalar::csr_spmv(rows, row_ptr, col_idx, values, x, y); break;
  }
}

}  // namespace fsi::kernels
