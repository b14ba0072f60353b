#pragma once

#include <array>
#include <memory>
#include <vector>

#include "fsi/meshkit/mesh.hpp"

namespace fsi::femcore {

using meshkit::Mesh;
using meshkit::Vec2;

/// Treatment of outflow-marked edges.
enum class OutflowMode {
  natural,  ///< do-nothing condition, no constraint
  no_flux,  ///< normal velocity component constrained to zero
};

/// Vector P2 velocity / P0 pressure space over fluid and structure.
///
/// Scalar P2 points (vertices and edge midpoints) are numbered once; an
/// interface point has a single number used by the element maps of both
/// sides. Velocity DOFs are interleaved, dof = 2 * point + component.
/// Pressure DOFs are the fluid triangles in mesh order.
struct CoupledSpace {
  std::shared_ptr<const Mesh> mesh;
  Index num_points = 0;
  /// Per triangle: points of v0, v1, v2, m12, m20, m01.
  std::vector<std::array<Index, 6>> element_points;
  /// Mesh node to point.
  std::vector<Index> node_point;
  /// Per triangle: pressure DOF, -1 on structure triangles.
  std::vector<Index> pressure_dof;
  Index num_pressure = 0;
  /// Constrained velocity DOFs, ascending.
  std::vector<Index> dirichlet_dofs;
  std::vector<char> fluid_point;
  std::vector<char> structure_point;

  Index num_velocity() const { return 2 * num_points; }
  static Index dof(Index point, int component) { return 2 * point + component; }

  /// Same DOF layout over a moved copy of the mesh (same connectivity).
  CoupledSpace on_mesh(std::shared_ptr<const Mesh> moved) const;
  /// Point coordinates on the current mesh; interface points take the
  /// fluid-side position.
  std::vector<Vec2> point_coordinates() const;
};

/// Throws fsi::Error if an edge is shared by fluid and structure elements
/// without being a matched interface edge, or if a no-flux outflow edge is
/// not axis aligned.
CoupledSpace build_space(std::shared_ptr<const Mesh> mesh, OutflowMode outflow = OutflowMode::natural);

}  // namespace fsi::femcore
