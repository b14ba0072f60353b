#pragma once

#include <span>
#include <vector>

#include "fsi/femcore/assembly.hpp"

namespace fsi::femcore {

struct BoundaryValue {
  Index dof;
  double value;
};

/// Blocks restricted to the free velocity DOFs after symmetric elimination.
///
/// With g the Dirichlet values, the lifts needed by every system variant are
/// kept: `rhs` is f_free - A_fD g, `lift_d` is D_fD g and `lift_b` is B_D g.
struct ReducedBlocks {
  CsrMatrix a;
  CsrMatrix b;
  CsrMatrix d;
  std::vector<double> mp;
  std::vector<double> rhs;
  std::vector<double> lift_d;
  std::vector<double> lift_b;
  std::vector<Index> free_dofs;
  std::vector<Index> dirichlet_dofs;
  std::vector<double> dirichlet_values;
  Index full_size = 0;

  Index num_free() const { return static_cast<Index>(free_dofs.size()); }
  /// Full velocity vector from free values plus the boundary values.
  std::vector<double> expand(std::span<const double> free_values) const;
  std::vector<double> restrict_to_free(std::span<const double> full) const;
};

/// `dirichlet_dofs` need not be sorted; DOFs without an entry in `values`
/// get zero. Throws if a value targets a DOF that is not constrained.
ReducedBlocks apply_dirichlet(const AssembledBlocks& blocks, std::span<const double> rhs,
                              std::span<const Index> dirichlet_dofs, std::span<const BoundaryValue> values = {});

}  // namespace fsi::femcore
