#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsi/femcore/dirichlet.hpp"
#include "fsi/krylov/block_preconditioner.hpp"
#include "fsi/krylov/gmres.hpp"

namespace fsi::fsisystem {

using femcore::MaterialParams;
using krylov::CsrMatrix;

/// max{1, mu_f, rho_f/k, rho_s/k, k mu_s, k lambda_s}
double compute_r(const MaterialParams& p);

enum class Variant { plain, stabilized, augmented };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);
/// Variant each preconditioner is designed for (M1 stabilized, M2 plain,
/// M3 augmented, SC plain).
Variant natural_variant(krylov::PreconditionerKind kind);

/// Saddle point system [K B'; B 0] on the free velocity DOFs, where K is A,
/// A + rD or A + rD^Q depending on the variant. The blocks of the plain form
/// are kept so any preconditioner can be built from any variant.
struct BlockSystem {
  Variant variant = Variant::plain;
  double r = 1.0;
  CsrMatrix a;
  CsrMatrix d;
  CsrMatrix b;
  std::vector<double> mp;
  CsrMatrix velocity_block;
  std::vector<double> rhs_velocity;
  std::vector<double> rhs_pressure;

  Index nv() const { return velocity_block.rows(); }
  Index np() const { return b.rows(); }
  Index size() const { return nv() + np(); }

  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> rhs() const;
  krylov::SaddleBlocks saddle_blocks() const;
};

BlockSystem build_system(const femcore::ReducedBlocks& blocks, const MaterialParams& params, Variant variant);
/// Explicit r (may be zero here, which makes all variants coincide).
BlockSystem build_system(const femcore::ReducedBlocks& blocks, double r, Variant variant);

struct ResidualNorms {
  double velocity = 0.0;
  double divergence = 0.0;
};

/// Euclidean norms of rhs_v - K v - B'p and rhs_p - B v.
ResidualNorms residual(const BlockSystem& system, std::span<const double> v, std::span<const double> p);

struct Preconditioner {
  krylov::BlockPreconditioner op;
  /// Set when the system variant differs from the kind's natural variant.
  std::optional<std::string> warning;
};

Preconditioner make_preconditioner(const BlockSystem& system, krylov::PreconditionerKind kind,
                                   krylov::ApplicationMode mode = krylov::ApplicationMode::triangular);

struct Solution {
  std::vector<double> velocity;
  std::vector<double> pressure;
  krylov::SolveReport report;
};

/// Preconditioned GMRES from a zero initial guess.
Solution solve(const BlockSystem& system, const Preconditioner& precond, const krylov::GmresOptions& options = {});
/// Same with an explicit right-hand side (velocity block first).
Solution solve(const BlockSystem& system, const Preconditioner& precond, std::span<const double> rhs,
               const krylov::GmresOptions& options = {});

}  // namespace fsi::fsisystem
