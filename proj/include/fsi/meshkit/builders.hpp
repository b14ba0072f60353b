#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>

#include "fsi/meshkit/mesh.hpp"

namespace fsi::meshkit {

enum class Geometry { cavity_halves, channel_flag };

Geometry parse_geometry(std::string_view tag);
std::string_view to_string(Geometry g);

/// Cell kinds for build_grid_mesh.
enum class CellKind { empty, fluid, structure };

/// Tensor-product grid with every cell split along its (x0,y0)-(x1,y1)
/// diagonal. Nodes are duplicated where fluid and structure cells meet.
/// Outer boundary edges of fluid cells on x = xs.back() are marked outflow,
/// all other outer edges outer_dirichlet.
Mesh build_grid_mesh(std::span<const double> xs, std::span<const double> ys,
                     const std::function<CellKind(int i, int j)>& kind);

/// Uniform nx-by-ny grid on a rectangle, one subdomain.
Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                          Subdomain tag = Subdomain::fluid);

/// Level-0 mesh of `geometry` refined `level` times by quadrisection.
Mesh build_two_region_mesh(Geometry geometry, int level);
Mesh build_two_region_mesh(std::string_view geometry, int level);

/// Splits every triangle into four through its edge midpoints.
Mesh refine_uniform(const Mesh& mesh);

/// Plain text: `nodes N triangles M edges K`, then N lines `x y`, M lines
/// `i j k tag`, K lines `i j marker`; coordinates with 17 significant digits.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace fsi::meshkit
