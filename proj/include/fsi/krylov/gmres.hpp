#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fsi/common.hpp"

namespace fsi::krylov {

/// y = Op(x); x and y never alias.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
};

struct SolveReport {
  int iterations = 0;
  /// Relative residual ||b - Kx_i|| / ||b|| after each iteration i, starting
  /// with the initial guess. Values come from the Arnoldi least-squares
  /// problem and are nonincreasing within one Arnoldi cycle (a new cycle
  /// starts only if the estimate and the true residual disagree).
  std::vector<double> residual_history;
  /// True relative residual of the returned solution.
  double final_relative_residual = 0.0;
  bool converged = false;
  double wall_time = 0.0;
  std::string preconditioner = "none";
  std::string variant;
};

/// Full (non-restarted) GMRES with right preconditioning.
///
/// Solves K x = b, using `x` as the initial guess. The iteration stops once
/// the true relative residual ||b - K x|| / ||b|| falls below the tolerance;
/// the Arnoldi estimate only decides when to check it. A zero right-hand side
/// returns x = 0 after zero iterations. Pass an empty `precond` for none.
SolveReport gmres(const LinearOperator& op, const LinearOperator& precond, std::span<const double> b,
                  std::span<double> x, const GmresOptions& options = {});

}  // namespace fsi::krylov
