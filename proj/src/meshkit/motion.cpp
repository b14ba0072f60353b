#include "fsi/meshkit/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fsi/krylov/sparse_lu.hpp"
#include "fsi/krylov/sparse_matrix.hpp"

namespace fsi::meshkit {

namespace {

using krylov::CsrMatrix;
using krylov::Triplet;

// Gradients of the three P1 hat functions on triangle (p0, p1, p2).
std::array<Vec2, 3> p1_gradients(Vec2 p0, Vec2 p1, Vec2 p2, double& area) {
  const double det = cross(p1 - p0, p2 - p0);
  area = 0.5 * det;
  return {Vec2{(p1.y - p2.y) / det, (p2.x - p1.x) / det}, Vec2{(p2.y - p0.y) / det, (p0.x - p2.x) / det},
          Vec2{(p0.y - p1.y) / det, (p1.x - p0.x) / det}};
}

double det2(const std::array<double, 4>& f) { return f[0] * f[3] - f[1] * f[2]; }

double spectral_norm(const std::array<double, 4>& f) {
  const double s = f[0] * f[0] + f[1] * f[1] + f[2] * f[2] + f[3] * f[3];
  const double d = det2(f);
  return std::sqrt(0.5 * (s + std::sqrt(std::max(s * s - 4.0 * d * d, 0.0))));
}

void finish(MeshMotion& m) {
  const Mesh& mesh = *m.reference;
  m.min_det = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < mesh.num_triangles(); ++t)
    if (mesh.triangles()[t].tag == Subdomain::fluid) m.min_det = std::min(m.min_det, det2(motion_jacobian(m, t)));
  m.valid = m.min_det > 0.0;
}

}  // namespace

std::array<double, 4> motion_jacobian(const MeshMotion& motion, Index t) {
  const Mesh& mesh = *motion.reference;
  const auto& v = mesh.triangles()[t].v;
  const Vec2 x0 = mesh.nodes()[v[0]], x1 = mesh.nodes()[v[1]], x2 = mesh.nodes()[v[2]];
  const Vec2 d0 = motion.displacement[v[0]], d1 = motion.displacement[v[1]], d2 = motion.displacement[v[2]];
  const Vec2 e1 = x1 - x0, e2 = x2 - x0;
  const Vec2 g1 = d1 - d0, g2 = d2 - d0;
  // F = I + G with G [e1 e2] = [g1 g2]; zero displacement gives F = I exactly.
  const double det = cross(e1, e2);
  const double i00 = e2.y / det, i01 = -e2.x / det, i10 = -e1.y / det, i11 = e1.x / det;
  return {1.0 + (g1.x * i00 + g2.x * i10), g1.x * i01 + g2.x * i11, g1.y * i00 + g2.y * i10,
          1.0 + (g1.y * i01 + g2.y * i11)};
}

MeshMotion make_motion(std::shared_ptr<const Mesh> reference, std::vector<Vec2> displacement, ExtensionOperator op) {
  if (!reference) throw Error("make_motion: missing reference mesh");
  if (static_cast<Index>(displacement.size()) != reference->num_nodes())
    throw Error("make_motion: displacement size does not match the mesh");
  for (Index n = 0; n < reference->num_nodes(); ++n)
    if (reference->node_subdomain(n) == Subdomain::structure) displacement[n] = {};
  MeshMotion m{std::move(reference), std::move(displacement), op};
  finish(m);
  return m;
}

MeshMotion identity_motion(std::shared_ptr<const Mesh> reference) {
  const auto n = static_cast<std::size_t>(reference->num_nodes());
  return make_motion(std::move(reference), std::vector<Vec2>(n));
}

MeshMotion solve_ale_extension(std::shared_ptr<const Mesh> reference, std::span<const Vec2> boundary_data,
                               const ExtensionOptions& options) {
  if (!reference) throw Error("solve_ale_extension: missing reference mesh");
  const Mesh& mesh = *reference;
  const Index n = mesh.num_nodes();
  if (static_cast<Index>(boundary_data.size()) != n)
    throw Error("solve_ale_extension: boundary data must have one entry per node");
  const bool elastic = options.op.kind == ExtensionKind::elasticity;
  if (elastic && !(options.op.mu > 0.0 && options.op.lambda >= 0.0))
    throw Error("solve_ale_extension: elasticity needs mu > 0 and lambda >= 0");

  // Boundary values: zero on the outer fluid boundary, datum on the interface.
  std::vector<Vec2> disp(static_cast<std::size_t>(n));
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (Index v = 0; v < n; ++v) {
    if (mesh.node_subdomain(v) != Subdomain::fluid || !mesh.on_subdomain_boundary(v)) continue;
    fixed[v] = 1;
    if (options.prescribe_all_boundary || mesh.on_interface(v)) disp[v] = boundary_data[v];
  }

  // Unknown numbering: free fluid nodes in node order.
  std::vector<Index> unknown(static_cast<std::size_t>(n), -1);
  Index nf = 0;
  for (Index v = 0; v < n; ++v)
    if (mesh.node_subdomain(v) == Subdomain::fluid && !fixed[v]) unknown[v] = nf++;

  if (nf > 0) {
    const Index comps = 2;
    const Index size = elastic ? comps * nf : nf;
    std::vector<Triplet> trip;
    std::vector<double> rhs(static_cast<std::size_t>(elastic ? size : comps * nf), 0.0);
    for (const auto& tri : mesh.triangles()) {
      if (tri.tag != Subdomain::fluid) continue;
      double area = 0.0;
      const auto g = p1_gradients(mesh.nodes()[tri.v[0]], mesh.nodes()[tri.v[1]], mesh.nodes()[tri.v[2]], area);
      for (int i = 0; i < 3; ++i) {
        const Index ui = unknown[tri.v[i]];
        if (ui < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const Index uj = unknown[tri.v[j]];
          const Vec2 dj = disp[tri.v[j]];
          if (!elastic) {
            const double kij = area * (g[i].x * g[j].x + g[i].y * g[j].y);
            if (uj >= 0)
              trip.push_back({ui, uj, kij});
            else {
              rhs[static_cast<std::size_t>(ui)] -= kij * dj.x;
              rhs[static_cast<std::size_t>(nf + ui)] -= kij * dj.y;
            }
            continue;
          }
          // mu grad u : grad v + lambda div u div v, per component pair (a, b).
          const double gi[2] = {g[i].x, g[i].y}, gj[2] = {g[j].x, g[j].y};
          const double dvals[2] = {dj.x, dj.y};
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              double kab = options.op.lambda * gi[a] * gj[b];
              if (a == b) kab += options.op.mu * (gi[0] * gj[0] + gi[1] * gj[1]);
              kab *= area;
              if (uj >= 0)
                trip.push_back({comps * ui + a, comps * uj + b, kab});
              else
                rhs[static_cast<std::size_t>(comps * ui + a)] -= kab * dvals[b];
            }
        }
      }
    }
    const auto k = CsrMatrix::from_triplets(size, size, std::move(trip));
    const krylov::SparseLU lu(k);
    if (elastic) {
      const auto x = lu.solve(rhs);
      for (Index v = 0; v < n; ++v)
        if (unknown[v] >= 0) disp[v] = {x[comps * unknown[v]], x[comps * unknown[v] + 1]};
    } else {
      const auto xs = lu.solve(std::span<const double>(rhs).first(static_cast<std::size_t>(nf)));
      const auto ys = lu.solve(std::span<const double>(rhs).subspan(static_cast<std::size_t>(nf)));
      for (Index v = 0; v < n; ++v)
        if (unknown[v] >= 0) disp[v] = {xs[unknown[v]], ys[unknown[v]]};
    }
  }
  return make_motion(std::move(reference), std::move(disp), options.op);
}

Mesh move_mesh(const MeshMotion& motion) {
  if (!motion.reference) throw Error("move_mesh: missing reference mesh");
  if (!motion.valid)
    throw InvalidMotionError("move_mesh: motion folds a fluid triangle (min det " + std::to_string(motion.min_det) +
                             ")");
  const Mesh& ref = *motion.reference;
  std::vector<Vec2> nodes(ref.nodes().begin(), ref.nodes().end());
  for (Index v = 0; v < ref.num_nodes(); ++v)
    if (ref.node_subdomain(v) == Subdomain::fluid) nodes[v] = nodes[v] + motion.displacement[v];
  return ref.with_nodes(std::move(nodes));
}

std::vector<Vec2> mesh_velocity(const MeshMotion& prev, const MeshMotion& next, double k) {
  if (!(k > 0.0)) throw Error("mesh_velocity: time step must be positive");
  if (prev.reference != next.reference && (prev.displacement.size() != next.displacement.size()))
    throw Error("mesh_velocity: motions over different meshes");
  std::vector<Vec2> w(next.displacement.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 / k) * (next.displacement[i] - prev.displacement[i]);
  return w;
}

GeometryReport geometry_report(const MeshMotion& motion) {
  const Mesh& mesh = *motion.reference;
  GeometryReport rep;
  rep.min_det = std::numeric_limits<double>::infinity();
  rep.min_angle = std::numbers::pi;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    if (tri.tag != Subdomain::fluid) continue;
    const auto f = motion_jacobian(motion, t);
    const double det = det2(f);
    rep.min_det = std::min(rep.min_det, det);

    std::array<Vec2, 3> x;
    for (int i = 0; i < 3; ++i) x[i] = mesh.nodes()[tri.v[i]] + motion.displacement[tri.v[i]];
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = x[(i + 1) % 3] - x[i], b = x[(i + 2) % 3] - x[i];
      rep.min_angle = std::min(rep.min_angle, std::abs(std::atan2(cross(a, b), a.x * b.x + a.y * b.y)));
    }

    const bool touches = mesh.on_interface(tri.v[0]) || mesh.on_interface(tri.v[1]) || mesh.on_interface(tri.v[2]);
    if (!touches) continue;
    rep.d0 = std::max(rep.d0, spectral_norm(f));
    if (det > 0.0)
      rep.d1 = std::max(rep.d1, 1.0 / det);
    else
      rep.d1 = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace fsi::meshkit
