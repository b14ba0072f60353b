#include "fsi/meshkit/mesh.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace fsi::meshkit {

std::string_view to_string(Subdomain s) { return s == Subdomain::fluid ? "fluid" : "structure"; }

std::string_view to_string(BoundaryMarker m) {
  switch (m) {
    case BoundaryMarker::outer_dirichlet: return "outer_dirichlet";
    case BoundaryMarker::outflow: return "outflow";
    case BoundaryMarker::interface: return "interface";
  }
  return "?";
}

Subdomain parse_subdomain(std::string_view s) {
  if (s == "fluid") return Subdomain::fluid;
  if (s == "structure") return Subdomain::structure;
  throw Error("unknown subdomain tag '" + std::string(s) + "'");
}

BoundaryMarker parse_marker(std::string_view s) {
  if (s == "outer_dirichlet") return BoundaryMarker::outer_dirichlet;
  if (s == "outflow") return BoundaryMarker::outflow;
  if (s == "interface") return BoundaryMarker::interface;
  throw Error("unknown boundary marker '" + std::string(s) + "'");
}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary_edges)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_edges_(std::move(boundary_edges)) {
  validate_and_pair();
}

double Mesh::signed_area(Index t) const {
  const auto& v = triangles_[t].v;
  return 0.5 * cross(nodes_[v[1]] - nodes_[v[0]], nodes_[v[2]] - nodes_[v[0]]);
}

double Mesh::subdomain_area(Subdomain s) const {
  double a = 0.0;
  for (Index t = 0; t < num_triangles(); ++t)
    if (triangles_[t].tag == s) a += signed_area(t);
  return a;
}

Mesh Mesh::with_nodes(std::vector<Vec2> nodes) const {
  if (nodes.size() != nodes_.size()) throw Error("Mesh::with_nodes: node count mismatch");
  Mesh m = *this;
  m.nodes_ = std::move(nodes);
  // Interface matching only holds in the reference configuration.
  m.check_interface_ = false;
  m.validate_and_pair();
  m.interface_edges_ = interface_edges_;
  m.partner_ = partner_;
  return m;
}

namespace {

using EdgeKey = std::pair<Index, Index>;
EdgeKey key(Index a, Index b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

}  // namespace

void Mesh::validate_and_pair() {
  const Index n = num_nodes();
  if (n == 0 || triangles_.empty()) throw Error("Mesh: empty mesh");

  double xmin = nodes_[0].x, xmax = xmin, ymin = nodes_[0].y, ymax = ymin;
  for (const auto& p : nodes_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error("Mesh: non-finite coordinate");
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  diameter_ = std::hypot(xmax - xmin, ymax - ymin);

  node_side_.assign(static_cast<std::size_t>(n), Subdomain::fluid);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  num_fluid_triangles_ = 0;
  for (Index t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (Index v : tri.v) {
      if (v < 0 || v >= n) throw Error("Mesh: triangle " + std::to_string(t) + " references missing node");
      const char side = tri.tag == Subdomain::fluid ? 1 : 2;
      if (used[v] != 0 && used[v] != side)
        throw Error("Mesh: node " + std::to_string(v) + " is shared by fluid and structure triangles");
      used[v] = side;
      node_side_[v] = tri.tag;
    }
    if (!(signed_area(t) > 0.0)) throw Error("Mesh: triangle " + std::to_string(t) + " is not counterclockwise");
    if (tri.tag == Subdomain::fluid) ++num_fluid_triangles_;
  }
  for (Index v = 0; v < n; ++v)
    if (!used[v]) throw Error("Mesh: node " + std::to_string(v) + " is not used by any triangle");

  // Edges with exactly one adjacent triangle must be the marked boundary edges.
  std::map<EdgeKey, int> edge_count;
  for (const auto& tri : triangles_)
    for (int e = 0; e < 3; ++e) ++edge_count[key(tri.v[e], tri.v[(e + 1) % 3])];
  std::map<EdgeKey, Index> marked;
  for (Index b = 0; b < static_cast<Index>(boundary_edges_.size()); ++b) {
    const auto& be = boundary_edges_[b];
    const auto k = key(be.v[0], be.v[1]);
    auto it = edge_count.find(k);
    if (it == edge_count.end() || it->second != 1)
      throw Error("Mesh: boundary edge " + std::to_string(b) + " is not a subdomain boundary edge");
    if (!marked.emplace(k, b).second) throw Error("Mesh: boundary edge listed twice");
  }
  on_boundary_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [k, c] : edge_count) {
    if (c > 2) throw Error("Mesh: edge shared by more than two triangles");
    if (c == 1 && !marked.count(k)) throw Error("Mesh: unmarked boundary edge");
  }
  for (const auto& be : boundary_edges_) on_boundary_[be.v[0]] = on_boundary_[be.v[1]] = 1;

  if (!check_interface_) return;

  // Pair interface edges geometrically: sort by midpoint x and sweep.
  const double tol = 1e-12 * std::max(diameter_, 1.0);
  struct Item {
    Index edge;
    double mx, my;
  };
  std::vector<Item> items;
  for (Index b = 0; b < static_cast<Index>(boundary_edges_.size()); ++b) {
    const auto& be = boundary_edges_[b];
    const Vec2 m = 0.5 * (nodes_[be.v[0]] + nodes_[be.v[1]]);
    items.push_back({b, m.x, m.y});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.mx < b.mx; });
  auto close = [&](Vec2 a, Vec2 b) { return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol; };

  interface_edges_.clear();
  partner_.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> match(boundary_edges_.size(), -1);
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size() && items[j].mx - items[i].mx <= tol; ++j) {
      if (std::abs(items[j].my - items[i].my) > tol) continue;
      const auto& e1 = boundary_edges_[items[i].edge];
      const auto& e2 = boundary_edges_[items[j].edge];
      const bool same_ends = (close(nodes_[e1.v[0]], nodes_[e2.v[0]]) && close(nodes_[e1.v[1]], nodes_[e2.v[1]])) ||
                             (close(nodes_[e1.v[0]], nodes_[e2.v[1]]) && close(nodes_[e1.v[1]], nodes_[e2.v[0]]));
      if (!same_ends) continue;
      if (e1.marker != BoundaryMarker::interface || e2.marker != BoundaryMarker::interface)
        throw Error("Mesh: coincident boundary edges not marked as interface");
      if (node_side_[e1.v[0]] == node_side_[e2.v[0]])
        throw Error("Mesh: coincident interface edges on the same subdomain");
      if (match[items[i].edge] >= 0 || match[items[j].edge] >= 0)
        throw Error("Mesh: interface edge matched more than once");
      match[items[i].edge] = items[j].edge;
      match[items[j].edge] = items[i].edge;
    }
  }
  for (Index b = 0; b < static_cast<Index>(boundary_edges_.size()); ++b) {
    const auto& be = boundary_edges_[b];
    if (be.marker != BoundaryMarker::interface) continue;
    if (match[b] < 0) throw Error("Mesh: interface edge " + std::to_string(b) + " has no matching partner");
    if (node_side_[be.v[0]] != Subdomain::fluid) continue;
    const auto& se = boundary_edges_[match[b]];
    InterfaceEdge ie;
    ie.fluid = be.v;
    ie.structure = close(nodes_[be.v[0]], nodes_[se.v[0]]) ? se.v : std::array<Index, 2>{se.v[1], se.v[0]};
    for (int k = 0; k < 2; ++k) {
      const Index f = ie.fluid[k], s = ie.structure[k];
      if ((partner_[f] >= 0 && partner_[f] != s) || (partner_[s] >= 0 && partner_[s] != f))
        throw Error("Mesh: inconsistent interface node pairing");
      partner_[f] = s;
      partner_[s] = f;
    }
    interface_edges_.push_back(ie);
  }
}

}  // namespace fsi::meshkit
