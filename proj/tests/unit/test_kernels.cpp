#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fsi/kernels/kernels.hpp"

using namespace fsi;
namespace k = fsi::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

struct RandomCsr {
  Index rows;
  std::vector<Index> row_ptr{0}, col_idx;
  std::vector<double> values;
};

RandomCsr random_csr(Index rows, Index cols, std::mt19937_64& rng) {
  RandomCsr m{rows};
  std::uniform_int_distribution<int> len(0, 13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index i = 0; i < rows; ++i) {
    const int l = len(rng);
    for (int j = 0; j < l; ++j) {
      m.col_idx.push_back(static_cast<Index>(rng() % static_cast<unsigned>(cols)));
      m.values.push_back(u(rng));
    }
    m.row_ptr.push_back(static_cast<Index>(m.col_idx.size()));
  }
  return m;
}

}  // namespace

TEST_CASE("simd kernels agree with the scalar reference") {
  std::mt19937_64 rng(7);
  const bool have_avx2 = k::backend_available(k::Backend::avx2);
  const bool have_neon = k::backend_available(k::Backend::neon);
  MESSAGE("active backend: " << k::backend_name(k::active_backend()));

  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 1000u, 1023u}) {
    const auto x = random_vector(n, rng);
    const auto y = random_vector(n, rng);
    const double ref = k::scalar::dot(x.data(), y.data(), n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
    const double tol = 1e-15 * (scale + 1.0) * std::sqrt(static_cast<double>(n) + 1.0);
    if (have_avx2) CHECK(std::abs(k::avx2::dot(x.data(), y.data(), n) - ref) <= tol);
    if (have_neon) CHECK(std::abs(k::neon::dot(x.data(), y.data(), n) - ref) <= tol);

    auto y_ref = y;
    k::scalar::axpy(0.37, x.data(), y_ref.data(), n);
    if (have_avx2) {
      auto y2 = y;
      k::avx2::axpy(0.37, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y2[i] - y_ref[i]) <= 1e-15 * (std::abs(y_ref[i]) + 1.0));
    }
  }

  for (Index rows : {1, 5, 64, 333}) {
    const Index cols = rows + 11;
    const auto m = random_csr(rows, cols, rng);
    const auto x = random_vector(static_cast<std::size_t>(cols), rng);
    std::vector<double> ref(static_cast<std::size_t>(rows)), out(ref.size());
    k::scalar::csr_spmv(rows, m.row_ptr.data(), m.col_idx.data(), m.values.data(), x.data(), ref.data());
    if (have_avx2) {
      k::avx2::csr_spmv(rows, m.row_ptr.data(), m.col_idx.data(), m.values.data(), x.data(), out.data());
      for (Index i = 0; i < rows; ++i) CHECK(std::abs(out[i] - ref[i]) <= 1e-14 * (std::abs(ref[i]) + 1.0));
    }
  }
}

TEST_CASE("backend selection") {
  CHECK(k::backend_available(k::Backend::scalar));
  const auto before = k::active_backend();
  k::force_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  CHECK(k::dot(x, y) == 32.0);
  CHECK(k::nrm2(x) == doctest::Approx(std::sqrt(14.0)));
  if (!k::backend_available(k::Backend::neon)) CHECK_THROWS_AS(k::force_backend(k::Backend::neon), fsi::Error);
  k::force_backend(before);
}
