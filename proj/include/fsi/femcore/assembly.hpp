#pragma once

#include <span>
#include <vector>

#include "fsi/femcore/space.hpp"
#include "fsi/krylov/gmres.hpp"
#include "fsi/krylov/sparse_matrix.hpp"

namespace fsi::femcore {

using krylov::CsrMatrix;

struct MaterialParams {
  double rho_f = 1.0;
  double rho_s = 1.0;
  double mu_f = 1.0;
  double mu_s = 1.0;
  double lambda_s = 1.0;
  double k = 1.0;  ///< time step

  /// Throws unless every field is strictly positive and finite.
  void validate() const;
};

struct AssembledBlocks {
  CsrMatrix a;             ///< velocity x velocity, form a
  CsrMatrix b;             ///< pressure x velocity, form b
  CsrMatrix d;             ///< fluid div-div
  std::vector<double> mp;  ///< P0 mass (fluid triangle areas)
};

/// (rho_f/k) M_f + mu_f E_f + (rho_s/k) M_s + k mu_s E_s + k lambda_s Div_s
/// with E the symmetric-gradient form. Coefficients may be zero (k > 0).
CsrMatrix assemble_a(const CoupledSpace& space, const MaterialParams& params);
/// Rows: pressure DOFs; entries int_T div(phi) over fluid triangles.
CsrMatrix assemble_b(const CoupledSpace& space);
CsrMatrix assemble_d(const CoupledSpace& space);
std::vector<double> assemble_mp(const CoupledSpace& space);
/// mu_s E_s + lambda_s Div_s on the structure (no time-step factor).
CsrMatrix assemble_structure_stiffness(const CoupledSpace& space, const MaterialParams& params);
/// Vector H1 Gram matrix (L2 mass plus gradient form) over both subdomains.
CsrMatrix assemble_h1_gram(const CoupledSpace& space);

AssembledBlocks assemble_blocks(const CoupledSpace& space, const MaterialParams& params);

/// v -> B' Mp^{-1} B v without forming the product; `b` must outlive it.
krylov::LinearOperator dq_operator(const CsrMatrix& b, std::span<const double> mp);
/// B' Mp^{-1} B as an explicit sparse matrix.
CsrMatrix assemble_dq(const CsrMatrix& b, std::span<const double> mp);

/// Previous-step data for the load vector. Empty spans stand for zero
/// fields; non-empty spans must have the full size.
struct RhsInputs {
  std::span<const double> velocity;      ///< v^n, velocity DOFs
  std::span<const double> displacement;  ///< structure displacement, velocity DOFs
  std::span<const Vec2> mesh_velocity;   ///< per mesh node
  Vec2 g_f{};
  Vec2 g_s{};
  /// Structure stiffness from assemble_structure_stiffness; recomputed per
  /// element when null.
  const CsrMatrix* structure_stiffness = nullptr;
};

/// Load vector of the velocity-form step:
///   fluid:     (g_f + rho_f/k v^n - rho_f ((v^n - w) . grad) v^n, phi)
///   structure: (g_s + rho_s/k v^n, phi) - (stress(u^n), grad phi)
/// on the mesh held by `space`.
std::vector<double> assemble_rhs(const CoupledSpace& space, const MaterialParams& params, const RhsInputs& in);

}  // namespace fsi::femcore
