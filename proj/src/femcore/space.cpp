#include "fsi/femcore/space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace fsi::femcore {

using meshkit::BoundaryMarker;
using meshkit::Subdomain;

CoupledSpace build_space(std::shared_ptr<const Mesh> mesh_ptr, OutflowMode outflow) {
  if (!mesh_ptr) throw Error("build_space: missing mesh");
  const Mesh& mesh = *mesh_ptr;
  CoupledSpace s;
  s.mesh = mesh_ptr;

  // Structure-side interface nodes map onto their fluid partner.
  auto canonical = [&](Index v) {
    return mesh.on_interface(v) && mesh.node_subdomain(v) == Subdomain::structure ? mesh.interface_partner(v) : v;
  };

  const Index n = mesh.num_nodes();
  s.node_point.assign(static_cast<std::size_t>(n), -1);
  for (Index v = 0; v < n; ++v)
    if (canonical(v) == v) s.node_point[v] = s.num_points++;
  for (Index v = 0; v < n; ++v) s.node_point[v] = s.node_point[canonical(v)];

  using Key = std::pair<Index, Index>;
  auto key = [&](Index a, Index b) {
    a = canonical(a);
    b = canonical(b);
    return a < b ? Key{a, b} : Key{b, a};
  };
  std::set<Key> interface_keys;
  for (const auto& ie : mesh.interface_edges()) interface_keys.insert(key(ie.fluid[0], ie.fluid[1]));

  struct EdgeInfo {
    Index point;
    int sides;  // bit 0 fluid, bit 1 structure
  };
  std::map<Key, EdgeInfo> edges;
  s.element_points.resize(mesh.triangles().size());
  s.pressure_dof.assign(mesh.triangles().size(), -1);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    auto& ep = s.element_points[t];
    for (int i = 0; i < 3; ++i) ep[i] = s.node_point[tri.v[i]];
    const int side_bit = tri.tag == Subdomain::fluid ? 1 : 2;
    for (int e = 0; e < 3; ++e) {
      // Local midpoint e is opposite to vertex e.
      const Key k = key(tri.v[(e + 1) % 3], tri.v[(e + 2) % 3]);
      auto [it, inserted] = edges.emplace(k, EdgeInfo{s.num_points, 0});
      if (inserted) ++s.num_points;
      it->second.sides |= side_bit;
      if (it->second.sides == 3 && !interface_keys.count(k))
        throw Error("build_space: edge shared by fluid and structure is not a matched interface edge");
      ep[3 + e] = it->second.point;
    }
    if (tri.tag == Subdomain::fluid) s.pressure_dof[t] = s.num_pressure++;
  }
  for (const auto& k : interface_keys)
    if (edges.at(k).sides != 3) throw Error("build_space: interface edge not shared by both subdomains");

  s.fluid_point.assign(static_cast<std::size_t>(s.num_points), 0);
  s.structure_point.assign(static_cast<std::size_t>(s.num_points), 0);
  for (Index t = 0; t < mesh.num_triangles(); ++t)
    for (Index p : s.element_points[t])
      (mesh.triangles()[t].tag == Subdomain::fluid ? s.fluid_point : s.structure_point)[p] = 1;

  std::set<Index> dirichlet;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.marker == BoundaryMarker::interface) continue;
    const Index pts[3] = {s.node_point[e.v[0]], s.node_point[e.v[1]], edges.at(key(e.v[0], e.v[1])).point};
    if (e.marker == BoundaryMarker::outer_dirichlet) {
      for (Index p : pts) {
        dirichlet.insert(CoupledSpace::dof(p, 0));
        dirichlet.insert(CoupledSpace::dof(p, 1));
      }
    } else if (outflow == OutflowMode::no_flux) {
      const Vec2 d = mesh.nodes()[e.v[1]] - mesh.nodes()[e.v[0]];
      const double len = meshkit::norm(d);
      int normal;
      if (std::abs(d.x) <= 1e-12 * len)
        normal = 0;
      else if (std::abs(d.y) <= 1e-12 * len)
        normal = 1;
      else
        throw Error("build_space: no-flux outflow needs axis-aligned edges");
      for (Index p : pts) dirichlet.insert(CoupledSpace::dof(p, normal));
    }
  }
  s.dirichlet_dofs.assign(dirichlet.begin(), dirichlet.end());
  return s;
}

CoupledSpace CoupledSpace::on_mesh(std::shared_ptr<const Mesh> moved) const {
  if (!moved || moved->num_nodes() != mesh->num_nodes() || moved->num_triangles() != mesh->num_triangles())
    throw Error("CoupledSpace::on_mesh: mesh does not match the space layout");
  for (Index t = 0; t < mesh->num_triangles(); ++t)
    if (moved->triangles()[t].v != mesh->triangles()[t].v)
      throw Error("CoupledSpace::on_mesh: connectivity differs");
  CoupledSpace s = *this;
  s.mesh = std::move(moved);
  return s;
}

std::vector<Vec2> CoupledSpace::point_coordinates() const {
  std::vector<Vec2> x(static_cast<std::size_t>(num_points));
  std::vector<char> set(static_cast<std::size_t>(num_points), 0);
  for (auto pass : {meshkit::Subdomain::fluid, meshkit::Subdomain::structure}) {
    for (Index t = 0; t < mesh->num_triangles(); ++t) {
      const auto& tri = mesh->triangles()[t];
      if (tri.tag != pass) continue;
      const auto& ep = element_points[t];
      Vec2 v[3];
      for (int i = 0; i < 3; ++i) v[i] = mesh->nodes()[tri.v[i]];
      const Vec2 local[6] = {v[0], v[1], v[2], 0.5 * (v[1] + v[2]), 0.5 * (v[2] + v[0]), 0.5 * (v[0] + v[1])};
      for (int i = 0; i < 6; ++i)
        if (!set[ep[i]]) {
          x[ep[i]] = local[i];
          set[ep[i]] = 1;
        }
    }
  }
  return x;
}

}  // namespace fsi::femcore
