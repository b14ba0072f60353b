#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fsi/common.hpp"

namespace fsi::meshkit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

enum class Subdomain : std::uint8_t { fluid, structure };
enum class BoundaryMarker : std::uint8_t { outer_dirichlet, outflow, interface };

std::string_view to_string(Subdomain s);
std::string_view to_string(BoundaryMarker m);
Subdomain parse_subdomain(std::string_view s);
BoundaryMarker parse_marker(std::string_view s);

struct Triangle {
  std::array<Index, 3> v;
  Subdomain tag;
};

struct BoundaryEdge {
  std::array<Index, 2> v;
  BoundaryMarker marker;
};

/// A geometrically coincident pair of interface edges; fluid[i] and
/// structure[i] are the two copies of the same point.
struct InterfaceEdge {
  std::array<Index, 2> fluid;
  std::array<Index, 2> structure;
};

/// Two-subdomain triangulation with duplicated nodes along the interface.
///
/// Fluid and structure triangles reference disjoint node sets. Interface
/// points exist once per side with identical coordinates in the reference
/// configuration, which lets the fluid side move while the structure side stays
/// on its reference configuration. Construction validates orientation,
/// boundary completeness and interface matching, and pairs interface edges.
class Mesh {
 public:
  Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary_edges);

  std::span<const Vec2> nodes() const { return nodes_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const BoundaryEdge> boundary_edges() const { return boundary_edges_; }
  std::span<const InterfaceEdge> interface_edges() const { return interface_edges_; }

  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
  Index num_fluid_triangles() const { return num_fluid_triangles_; }

  Subdomain node_subdomain(Index n) const { return node_side_[n]; }
  /// Coincident node on the other side of the interface, or -1.
  Index interface_partner(Index n) const { return partner_[n]; }
  bool on_interface(Index n) const { return partner_[n] >= 0; }
  /// Node lies on a boundary edge of its own subdomain (any marker).
  bool on_subdomain_boundary(Index n) const { return on_boundary_[n] != 0; }

  double diameter() const { return diameter_; }
  double signed_area(Index t) const;
  double subdomain_area(Subdomain s) const;

  /// Same connectivity and markers, new coordinates (revalidated).
  Mesh with_nodes(std::vector<Vec2> nodes) const;

 private:
  void validate_and_pair();

  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<InterfaceEdge> interface_edges_;
  std::vector<Subdomain> node_side_;
  std::vector<Index> partner_;
  std::vector<char> on_boundary_;
  Index num_fluid_triangles_ = 0;
  double diameter_ = 0.0;
  bool check_interface_ = true;
};

}  // namespace fsi::meshkit
