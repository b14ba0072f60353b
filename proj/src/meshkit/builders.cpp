#include "fsi/meshkit/builders.hpp"

#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace fsi::meshkit {

Geometry parse_geometry(std::string_view tag) {
  if (tag == "cavity_halves") return Geometry::cavity_halves;
  if (tag == "channel_flag") return Geometry::channel_flag;
  throw Error("unknown geometry '" + std::string(tag) + "'");
}

std::string_view to_string(Geometry g) { return g == Geometry::cavity_halves ? "cavity_halves" : "channel_flag"; }

Mesh build_grid_mesh(std::span<const double> xs, std::span<const double> ys,
                     const std::function<CellKind(int, int)>& kind) {
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;
  if (nx < 1 || ny < 1) throw Error("build_grid_mesh: need at least one cell per direction");
  for (int i = 0; i < nx; ++i)
    if (!(xs[i + 1] > xs[i])) throw Error("build_grid_mesh: grid lines must increase");
  for (int j = 0; j < ny; ++j)
    if (!(ys[j + 1] > ys[j])) throw Error("build_grid_mesh: grid lines must increase");

  auto cell = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return CellKind::empty;
    return kind(i, j);
  };

  std::vector<Vec2> nodes;
  // Node ids per grid point, one slot per subdomain.
  std::vector<std::array<Index, 2>> ids(static_cast<std::size_t>((nx + 1) * (ny + 1)), {-1, -1});
  auto node = [&](int i, int j, CellKind k) {
    auto& slot = ids[static_cast<std::size_t>(j * (nx + 1) + i)][k == CellKind::fluid ? 0 : 1];
    if (slot < 0) {
      slot = static_cast<Index>(nodes.size());
      nodes.push_back({xs[i], ys[j]});
    }
    return slot;
  };

  std::vector<Triangle> tris;
  std::vector<BoundaryEdge> edges;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const CellKind k = cell(i, j);
      if (k == CellKind::empty) continue;
      const Subdomain tag = k == CellKind::fluid ? Subdomain::fluid : Subdomain::structure;
      const Index p00 = node(i, j, k), p10 = node(i + 1, j, k), p11 = node(i + 1, j + 1, k), p01 = node(i, j + 1, k);
      tris.push_back({{p00, p10, p11}, tag});
      tris.push_back({{p00, p11, p01}, tag});

      struct Side {
        int di, dj;
        Index a, b;
      };
      const Side sides[4] = {{0, -1, p00, p10}, {1, 0, p10, p11}, {0, 1, p11, p01}, {-1, 0, p01, p00}};
      for (const auto& s : sides) {
        const CellKind nb = cell(i + s.di, j + s.dj);
        if (nb == k) continue;
        BoundaryMarker m = BoundaryMarker::outer_dirichlet;
        if (nb != CellKind::empty)
          m = BoundaryMarker::interface;
        else if (k == CellKind::fluid && s.di == 1 && i + 1 == nx)
          m = BoundaryMarker::outflow;
        edges.push_back({{s.a, s.b}, m});
      }
    }
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny, Subdomain tag) {
  if (nx < 1 || ny < 1) throw Error("build_rectangle_mesh: need at least one cell per direction");
  std::vector<double> xs(static_cast<std::size_t>(nx + 1)), ys(static_cast<std::size_t>(ny + 1));
  for (int i = 0; i <= nx; ++i) xs[i] = x0 + (x1 - x0) * i / nx;
  for (int j = 0; j <= ny; ++j) ys[j] = y0 + (y1 - y0) * j / ny;
  xs.back() = x1;
  ys.back() = y1;
  const CellKind k = tag == Subdomain::fluid ? CellKind::fluid : CellKind::structure;
  return build_grid_mesh(xs, ys, [k](int, int) { return k; });
}

namespace {

Mesh cavity_halves() {
  const std::vector<double> g{0.0, 0.25, 0.5, 0.75, 1.0};
  return build_grid_mesh(g, g, [](int, int j) { return j >= 2 ? CellKind::fluid : CellKind::structure; });
}

// Channel with a cylinder-like obstacle (square hole) and an elastic flag
// attached to its downstream side.
Mesh channel_flag() {
  const std::vector<double> xs{0.0, 0.15, 0.25, 0.35, 0.45, 0.6, 0.8, 1.05, 1.3, 1.6, 2.0, 2.5};
  const std::vector<double> ys{0.0, 0.08, 0.15, 0.19, 0.21, 0.25, 0.33, 0.41};
  return build_grid_mesh(xs, ys, [](int i, int j) {
    if (i == 1 && j >= 2 && j <= 4) return CellKind::empty;
    if (i >= 2 && i <= 4 && j == 3) return CellKind::structure;
    return CellKind::fluid;
  });
}

}  // namespace

Mesh build_two_region_mesh(Geometry geometry, int level) {
  if (level < 0) throw Error("build_two_region_mesh: refinement level must be nonnegative");
  Mesh m = geometry == Geometry::cavity_halves ? cavity_halves() : channel_flag();
  for (int l = 0; l < level; ++l) m = refine_uniform(m);
  return m;
}

Mesh build_two_region_mesh(std::string_view geometry, int level) {
  return build_two_region_mesh(parse_geometry(geometry), level);
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Vec2> nodes(mesh.nodes().begin(), mesh.nodes().end());
  std::map<std::pair<Index, Index>, Index> mid;
  auto midpoint = [&](Index a, Index b) {
    const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
    auto [it, inserted] = mid.emplace(key, static_cast<Index>(nodes.size()));
    if (inserted) nodes.push_back(0.5 * (nodes[a] + nodes[b]));
    return it->second;
  };

  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.triangles().size());
  for (const auto& t : mesh.triangles()) {
    const auto [v0, v1, v2] = t.v;
    const Index m01 = midpoint(v0, v1), m12 = midpoint(v1, v2), m20 = midpoint(v2, v0);
    tris.push_back({{v0, m01, m20}, t.tag});
    tris.push_back({{m01, v1, m12}, t.tag});
    tris.push_back({{m20, m12, v2}, t.tag});
    tris.push_back({{m01, m12, m20}, t.tag});
  }
  std::vector<BoundaryEdge> edges;
  edges.reserve(2 * mesh.boundary_edges().size());
  for (const auto& e : mesh.boundary_edges()) {
    const Index m = midpoint(e.v[0], e.v[1]);
    edges.push_back({{e.v[0], m}, e.marker});
    edges.push_back({{m, e.v[1]}, e.marker});
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old_precision = os.precision(17);
  os << "nodes " << mesh.num_nodes() << " triangles " << mesh.num_triangles() << " edges "
     << mesh.boundary_edges().size() << '\n';
  for (const auto& p : mesh.nodes()) os << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles())
    os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << to_string(t.tag) << '\n';
  for (const auto& e : mesh.boundary_edges()) os << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.marker) << '\n';
  os.precision(old_precision);
}

Mesh read_mesh(std::istream& is) {
  std::string w1, w2, w3;
  long long n = -1, m = -1, k = -1;
  if (!(is >> w1 >> n >> w2 >> m >> w3 >> k) || w1 != "nodes" || w2 != "triangles" || w3 != "edges" || n < 0 ||
      m < 0 || k < 0)
    throw Error("read_mesh: malformed header");
  std::vector<Vec2> nodes(static_cast<std::size_t>(n));
  for (auto& p : nodes)
    if (!(is >> p.x >> p.y)) throw Error("read_mesh: truncated node list");
  std::vector<Triangle> tris(static_cast<std::size_t>(m));
  std::string tag;
  for (auto& t : tris) {
    if (!(is >> t.v[0] >> t.v[1] >> t.v[2] >> tag)) throw Error("read_mesh: truncated triangle list");
    t.tag = parse_subdomain(tag);
  }
  std::vector<BoundaryEdge> edges(static_cast<std::size_t>(k));
  for (auto& e : edges) {
    if (!(is >> e.v[0] >> e.v[1] >> tag)) throw Error("read_mesh: truncated edge list");
    e.marker = parse_marker(tag);
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

}  // namespace fsi::meshkit
