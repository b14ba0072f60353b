#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fsi/meshkit/mesh.hpp"

namespace fsi::meshkit {

enum class ExtensionKind { laplacian, elasticity };

struct ExtensionOperator {
  ExtensionKind kind = ExtensionKind::laplacian;
  double mu = 1.0;
  double lambda = 1.0;
};

/// Raised by move_mesh for a motion that folds a fluid triangle.
class InvalidMotionError : public Error {
 public:
  using Error::Error;
};

/// Total displacement of the fluid mesh relative to a reference mesh.
///
/// `displacement` has one entry per mesh node; structure nodes always carry
/// zero since the structure stays on its reference configuration.
struct MeshMotion {
  std::shared_ptr<const Mesh> reference;
  std::vector<Vec2> displacement;
  ExtensionOperator op;
  /// Smallest det of the elementwise Jacobian over fluid triangles.
  double min_det = 1.0;
  bool valid = true;
};

struct ExtensionOptions {
  ExtensionOperator op;
  /// Take the datum on every fluid boundary node instead of the interface
  /// only (outer boundary is zero otherwise).
  bool prescribe_all_boundary = false;
};

/// Discrete P1 extension of boundary data into the fluid subdomain.
///
/// `boundary_data` is indexed by mesh node and read only at fluid-side
/// interface nodes (or at all fluid boundary nodes in prescribe_all_boundary
/// mode). Interface data wins at nodes that also touch the outer boundary.
/// Throws krylov::SingularMatrixError if the extension system is singular; a
/// motion that folds a triangle is returned with valid = false.
MeshMotion solve_ale_extension(std::shared_ptr<const Mesh> reference, std::span<const Vec2> boundary_data,
                               const ExtensionOptions& options = {});

/// Wraps an explicitly given nodal displacement (structure entries ignored).
MeshMotion make_motion(std::shared_ptr<const Mesh> reference, std::vector<Vec2> displacement,
                       ExtensionOperator op = {});
MeshMotion identity_motion(std::shared_ptr<const Mesh> reference);

/// Reference mesh with fluid nodes displaced; connectivity unchanged.
Mesh move_mesh(const MeshMotion& motion);

/// (A^{n+1} - A^n) / k per node.
std::vector<Vec2> mesh_velocity(const MeshMotion& prev, const MeshMotion& next, double k);

struct GeometryReport {
  double d0 = 1.0;
  double d1 = 1.0;
  double min_det = 1.0;
  double min_angle = 0.0;
};

/// Jacobian quantities of the piecewise-linear map x -> x + d(x).
///
/// d0 and d1 are maxima of ||J||_2 and 1/det J (each at least 1) over fluid
/// triangles touching the interface, min_det is taken over all fluid
/// triangles and min_angle is the smallest interior angle of the moved fluid
/// mesh. Folded elements are reported, not raised.
GeometryReport geometry_report(const MeshMotion& motion);

/// Elementwise Jacobian of the motion on triangle t, row-major 2x2.
std::array<double, 4> motion_jacobian(const MeshMotion& motion, Index t);

}  // namespace fsi::meshkit
