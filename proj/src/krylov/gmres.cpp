#include "fsi/krylov/gmres.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fsi/kernels/kernels.hpp"

namespace fsi::krylov {

namespace {

void givens(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (std::abs(b) > std::abs(a)) {
    const double t = a / b;
    s = 1.0 / std::sqrt(1.0 + t * t);
    c = t * s;
  } else {
    const double t = b / a;
    c = 1.0 / std::sqrt(1.0 + t * t);
    s = t * c;
  }
}

}  // namespace

SolveReport gmres(const LinearOperator& op, const LinearOperator& precond, std::span<const double> b,
                  std::span<double> x, const GmresOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = b.size();
  if (x.size() != n) throw Error("gmres: size mismatch");
  if (!(options.tolerance > 0.0)) throw Error("gmres: tolerance must be positive");
  for (double v : b)
    if (!std::isfinite(v)) throw Error("gmres: right-hand side is not finite");

  SolveReport report;
  auto finish = [&] {
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  };

  const double bnorm = kernels::nrm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.residual_history = {0.0};
    report.converged = true;
    return finish();
  }

  std::vector<double> r(n), w(n), z(n);
  auto true_residual = [&](std::span<const double> xv) {
    op(xv, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    return kernels::nrm2(r) / bnorm;
  };

  double rel = true_residual(x);
  report.residual_history.push_back(rel);
  report.final_relative_residual = rel;
  if (rel < options.tolerance) {
    report.converged = true;
    return finish();
  }

  const int m = std::max(options.max_iterations, 0);
  std::vector<std::vector<double>> v;  // Arnoldi basis
  std::vector<std::vector<double>> h;  // columns of the Hessenberg matrix
  std::vector<double> cs, sn, g;
  std::vector<double> x0(x.begin(), x.end());
  double beta = rel * bnorm;

  auto build_solution = [&](int k) {
    // Back substitution on the k x k triangular system, then x = x0 + M^{-1} V y.
    std::vector<double> y(g.begin(), g.begin() + k);
    for (int i = k - 1; i >= 0; --i) {
      for (int j = i + 1; j < k; ++j) y[i] -= h[j][i] * y[j];
      y[i] /= h[i][i];
    }
    std::vector<double> u(n, 0.0);
    for (int j = 0; j < k; ++j) kernels::axpy(y[j], v[j], u);
    if (precond) {
      precond(u, z);
    } else {
      z = u;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = x0[i] + z[i];
  };

  // Restarting the Arnoldi process from the current iterate only happens if
  // the estimate and the true residual disagree (loss of orthogonality).
  int total = 0;
  double best = rel;
  std::vector<double> x_best(x.begin(), x.end());
  while (total < m) {
    v.clear();
    h.clear();
    cs.clear();
    sn.clear();
    g.assign(1, beta);
    v.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;

    int k = 0;
    bool check = false;
    while (total < m) {
      // w = K M^{-1} v_k
      if (precond) {
        precond(v[k], z);
        op(z, w);
      } else {
        op(v[k], w);
      }
      std::vector<double> hk(static_cast<std::size_t>(k) + 2, 0.0);
      for (int j = 0; j <= k; ++j) {
        hk[j] = kernels::dot(w, v[j]);
        kernels::axpy(-hk[j], v[j], w);
      }
      // One reorthogonalization pass keeps the basis orthonormal for long runs.
      for (int j = 0; j <= k; ++j) {
        const double c = kernels::dot(w, v[j]);
        hk[j] += c;
        kernels::axpy(-c, v[j], w);
      }
      const double hnext = kernels::nrm2(w);
      hk[k + 1] = hnext;
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * hk[j] + sn[j] * hk[j + 1];
        hk[j + 1] = -sn[j] * hk[j] + cs[j] * hk[j + 1];
        hk[j] = t;
      }
      double c, s;
      givens(hk[k], hk[k + 1], c, s);
      cs.push_back(c);
      sn.push_back(s);
      hk[k] = c * hk[k] + s * hk[k + 1];
      hk[k + 1] = 0.0;
      g.push_back(-s * g[k]);
      g[k] = c * g[k];
      h.push_back(std::move(hk));
      ++k;
      ++total;
      const double est = std::abs(g[k]) / bnorm;
      report.residual_history.push_back(est);
      report.iterations = total;

      const bool breakdown = hnext <= 1e-14 * beta || h[k - 1][k - 1] == 0.0;
      if (est < options.tolerance || breakdown) {
        check = true;
        break;
      }
      v.emplace_back(n);
      for (std::size_t i = 0; i < n; ++i) v[k][i] = w[i] / hnext;
    }

    if (k > 0 && h[k - 1][k - 1] != 0.0) build_solution(k);
    rel = true_residual(x);
    report.final_relative_residual = rel;
    if (rel < options.tolerance) {
      report.converged = true;
      return finish();
    }
    if (rel < best) {
      best = rel;
      x_best.assign(x.begin(), x.end());
    } else {
      // A restart that does not improve the true residual means the attainable
      // accuracy is reached; return the best iterate.
      std::copy(x_best.begin(), x_best.end(), x.begin());
      report.final_relative_residual = best;
      break;
    }
    if (!check) break;
    // Estimated convergence not confirmed: continue from the current iterate.
    x0.assign(x.begin(), x.end());
    beta = rel * bnorm;
    if (beta == 0.0) break;
  }
  report.converged = report.final_relative_residual < options.tolerance;
  return finish();
}

}  // namespace fsi::krylov
