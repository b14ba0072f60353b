#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "fsi/krylov/sparse_lu.hpp"
#include "fsi/krylov/sparse_matrix.hpp"

namespace fsi::krylov {

enum class PreconditionerKind { M1, M2, M3, SC };
enum class ApplicationMode { triangular, diagonal };

std::string_view to_string(PreconditionerKind k);
std::string_view to_string(ApplicationMode m);
PreconditionerKind parse_preconditioner_kind(std::string_view s);
ApplicationMode parse_application_mode(std::string_view s);

/// Blocks of the saddle point matrix [K B'; B 0] needed to build any of the
/// preconditioners. `a` is the plain velocity block, `d` the fluid div-div
/// block and `mp` the diagonal of the P0 pressure mass matrix.
struct SaddleBlocks {
  const CsrMatrix* a = nullptr;
  const CsrMatrix* d = nullptr;
  const CsrMatrix* b = nullptr;
  std::span<const double> mp;
  double r = 1.0;
};

/// Block preconditioner [V 0; B S]^{-1}-style operator for a saddle point
/// system whose rows are ordered (velocity, pressure).
///
///   M1: V = A + rD,     S = r^{-1} Mp
///   M2: V = A + rD^Q,   S = r^{-1} Mp
///   M3: same operator as M2
///   SC: V = A,          S = -B diag(A)^{-1} B'
///
/// In triangular mode z_p = S^{-1} r_p and z_v = V^{-1}(r_v - B' z_p); in
/// diagonal mode the coupling term is dropped. For SC the pressure solve uses
/// -S so that both blocks are solved with positive definite matrices and the
/// sign is folded back in.
class BlockPreconditioner {
 public:
  BlockPreconditioner(const SaddleBlocks& blocks, PreconditionerKind kind,
                      ApplicationMode mode = ApplicationMode::triangular);

  PreconditionerKind kind() const { return kind_; }
  ApplicationMode mode() const { return mode_; }
  Index velocity_size() const { return nv_; }
  Index pressure_size() const { return np_; }

  const CsrMatrix& velocity_block() const { return velocity_block_; }
  /// Pressure block S as a sparse matrix (diagonal for M1-M3).
  const CsrMatrix& pressure_block() const { return pressure_block_; }

  void solve_velocity(std::span<const double> rhs, std::span<double> out) const;
  void solve_pressure(std::span<const double> rhs, std::span<double> out) const;

  /// z = P^{-1} residual; both are (velocity, pressure) concatenations.
  void apply(std::span<const double> residual, std::span<double> z) const;

 private:
  PreconditionerKind kind_;
  ApplicationMode mode_;
  Index nv_ = 0;
  Index np_ = 0;
  const CsrMatrix* b_ = nullptr;
  CsrMatrix velocity_block_;
  CsrMatrix pressure_block_;
  std::shared_ptr<const SparseLU> velocity_lu_;
  std::shared_ptr<const SparseLU> pressure_lu_;  // SC only: factor of -S
  std::vector<double> pressure_scale_;           // M1-M3: r / mp
};

}  // namespace fsi::krylov
