#include "fsi/femcore/dirichlet.hpp"

#include <algorithm>
#include <string>

namespace fsi::femcore {

std::vector<double> ReducedBlocks::expand(std::span<const double> free_values) const {
  if (static_cast<Index>(free_values.size()) != num_free()) throw Error("ReducedBlocks::expand: size mismatch");
  std::vector<double> full(static_cast<std::size_t>(full_size), 0.0);
  for (std::size_t i = 0; i < free_dofs.size(); ++i) full[free_dofs[i]] = free_values[i];
  for (std::size_t i = 0; i < dirichlet_dofs.size(); ++i) full[dirichlet_dofs[i]] = dirichlet_values[i];
  return full;
}

std::vector<double> ReducedBlocks::restrict_to_free(std::span<const double> full) const {
  if (static_cast<Index>(full.size()) != full_size) throw Error("ReducedBlocks::restrict_to_free: size mismatch");
  std::vector<double> r(free_dofs.size());
  for (std::size_t i = 0; i < free_dofs.size(); ++i) r[i] = full[free_dofs[i]];
  return r;
}

ReducedBlocks apply_dirichlet(const AssembledBlocks& blocks, std::span<const double> rhs,
                              std::span<const Index> dirichlet_dofs, std::span<const BoundaryValue> values) {
  const Index n = blocks.a.rows();
  if (blocks.a.cols() != n || blocks.d.rows() != n || blocks.d.cols() != n || blocks.b.cols() != n ||
      static_cast<Index>(rhs.size()) != n || static_cast<Index>(blocks.mp.size()) != blocks.b.rows())
    throw Error("apply_dirichlet: inconsistent block dimensions");

  std::vector<char> constrained(static_cast<std::size_t>(n), 0);
  for (Index d : dirichlet_dofs) {
    if (d < 0 || d >= n) throw Error("apply_dirichlet: Dirichlet DOF out of range");
    constrained[d] = 1;
  }
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  for (const auto& bv : values) {
    if (bv.dof < 0 || bv.dof >= n || !constrained[bv.dof])
      throw Error("apply_dirichlet: value given for non-Dirichlet DOF " + std::to_string(bv.dof));
    g[bv.dof] = bv.value;
  }

  ReducedBlocks r;
  r.full_size = n;
  for (Index i = 0; i < n; ++i) (constrained[i] ? r.dirichlet_dofs : r.free_dofs).push_back(i);
  for (Index d : r.dirichlet_dofs) r.dirichlet_values.push_back(g[d]);

  std::vector<Index> all_p(static_cast<std::size_t>(blocks.b.rows()));
  for (Index i = 0; i < blocks.b.rows(); ++i) all_p[i] = i;
  r.a = blocks.a.submatrix(r.free_dofs, r.free_dofs);
  r.d = blocks.d.submatrix(r.free_dofs, r.free_dofs);
  r.b = blocks.b.submatrix(all_p, r.free_dofs);
  r.mp = blocks.mp;

  // Lifts from the boundary-value vector (zero on free DOFs).
  const auto ag = blocks.a.multiply(g);
  const auto dg = blocks.d.multiply(g);
  r.lift_b = blocks.b.multiply(g);
  r.rhs.resize(r.free_dofs.size());
  r.lift_d.resize(r.free_dofs.size());
  for (std::size_t i = 0; i < r.free_dofs.size(); ++i) {
    r.rhs[i] = rhs[r.free_dofs[i]] - ag[r.free_dofs[i]];
    r.lift_d[i] = dg[r.free_dofs[i]];
  }
  return r;
}

}  // namespace fsi::femcore
