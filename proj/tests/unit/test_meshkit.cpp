#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fsi/meshkit/builders.hpp"
#include "fsi/meshkit/motion.hpp"

using namespace fsi;
using namespace fsi::meshkit;

namespace {

std::shared_ptr<const Mesh> shared(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

// Interface datum used in several tests: a vertical bump vanishing at the walls.
std::vector<Vec2> bump_datum(const Mesh& mesh, double amplitude) {
  std::vector<Vec2> d(static_cast<std::size_t>(mesh.num_nodes()));
  for (Index v = 0; v < mesh.num_nodes(); ++v)
    if (mesh.on_interface(v)) d[v] = {0.0, amplitude * std::sin(std::numbers::pi * mesh.nodes()[v].x)};
  return d;
}

// Dense P1 Laplace extension written from scratch: area-weighted gradient
// products with gradients from the inverse of the vertex matrix.
std::vector<Vec2> dense_extension(const Mesh& mesh, const std::vector<Vec2>& datum) {
  const Index n = mesh.num_nodes();
  std::vector<int> bnd(static_cast<std::size_t>(n), 0), fluid(static_cast<std::size_t>(n), 0);
  for (const auto& t : mesh.triangles())
    if (t.tag == Subdomain::fluid)
      for (Index v : t.v) fluid[v] = 1;
  for (const auto& e : mesh.boundary_edges())
    for (Index v : e.v)
      if (fluid[v]) bnd[v] = 1;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : mesh.triangles()) {
    if (t.tag != Subdomain::fluid) continue;
    Eigen::Matrix3d vm;
    for (int i = 0; i < 3; ++i) vm.row(i) << 1.0, mesh.nodes()[t.v[i]].x, mesh.nodes()[t.v[i]].y;
    const Eigen::Matrix3d c = vm.inverse();  // column i: coefficients of hat i
    const double area = 0.5 * std::abs(vm.determinant());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) k(t.v[i], t.v[j]) += area * (c(1, i) * c(1, j) + c(2, i) * c(2, j));
  }
  std::vector<Vec2> out(datum.size());
  std::vector<Index> freev;
  for (Index v = 0; v < n; ++v)
    if (fluid[v] && !bnd[v]) freev.push_back(v);
  const auto m = static_cast<Index>(freev.size());
  Eigen::MatrixXd kf(m, m);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) kf(i, j) = k(freev[i], freev[j]);
    for (Index v = 0; v < n; ++v)
      if (fluid[v] && bnd[v]) {
        rhs(i, 0) -= k(freev[i], v) * datum[v].x;
        rhs(i, 1) -= k(freev[i], v) * datum[v].y;
      }
  }
  const Eigen::MatrixXd x = kf.partialPivLu().solve(rhs);
  for (Index v = 0; v < n; ++v)
    if (fluid[v] && bnd[v]) out[v] = datum[v];
  for (Index i = 0; i < m; ++i) out[freev[i]] = {x(i, 0), x(i, 1)};
  return out;
}

}  // namespace

TEST_CASE("cavity halves level 0") {
  const auto m = build_two_region_mesh(Geometry::cavity_halves, 0);
  CHECK(m.num_triangles() == 32);
  CHECK(m.num_fluid_triangles() == 16);
  CHECK(m.interface_edges().size() == 4);
  for (const auto& ie : m.interface_edges())
    for (int k = 0; k < 2; ++k) {
      CHECK(m.nodes()[ie.fluid[k]].y == 0.5);
      CHECK(m.nodes()[ie.structure[k]] == m.nodes()[ie.fluid[k]]);
      CHECK(m.node_subdomain(ie.fluid[k]) == Subdomain::fluid);
      CHECK(m.node_subdomain(ie.structure[k]) == Subdomain::structure);
    }
  CHECK(m.subdomain_area(Subdomain::fluid) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.subdomain_area(Subdomain::structure) == doctest::Approx(0.5).epsilon(1e-15));
  int outflow = 0;
  for (const auto& e : m.boundary_edges())
    if (e.marker == BoundaryMarker::outflow) {
      ++outflow;
      CHECK(m.nodes()[e.v[0]].x == 1.0);
      CHECK(m.node_subdomain(e.v[0]) == Subdomain::fluid);
    }
  CHECK(outflow == 2);
}

TEST_CASE("refinement quadruples triangles and keeps interface on y = 0.5") {
  auto m0 = build_two_region_mesh(Geometry::cavity_halves, 0);
  for (int level = 1; level <= 3; ++level) {
    auto m = build_two_region_mesh(Geometry::cavity_halves, level);
    CHECK(m.num_triangles() == 32 * (1 << (2 * level)));
    CHECK(m.interface_edges().size() == 4u * (1u << level));
    for (const auto& ie : m.interface_edges()) CHECK(m.nodes()[ie.fluid[0]].y == 0.5);
    CHECK(m.subdomain_area(Subdomain::fluid) == doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK(refine_uniform(m0).num_triangles() == 4 * m0.num_triangles());
}

TEST_CASE("channel flag interface separates fluid from structure") {
  for (int level = 0; level <= 1; ++level) {
    const auto m = build_two_region_mesh("channel_flag", level);
    CHECK(!m.interface_edges().empty());
    std::map<std::pair<Index, Index>, Subdomain> owner;
    for (const auto& t : m.triangles())
      for (int e = 0; e < 3; ++e) {
        Index a = t.v[e], b = t.v[(e + 1) % 3];
        owner[{std::min(a, b), std::max(a, b)}] = t.tag;
      }
    for (const auto& ie : m.interface_edges()) {
      auto f = owner.at({std::min(ie.fluid[0], ie.fluid[1]), std::max(ie.fluid[0], ie.fluid[1])});
      auto s = owner.at({std::min(ie.structure[0], ie.structure[1]), std::max(ie.structure[0], ie.structure[1])});
      CHECK(f == Subdomain::fluid);
      CHECK(s == Subdomain::structure);
    }
    // Flag is 0.35 x 0.02 and its left end is clamped to the obstacle.
    CHECK(m.subdomain_area(Subdomain::structure) == doctest::Approx(0.35 * 0.02).epsilon(1e-12));
  }
  CHECK_THROWS_AS(build_two_region_mesh("turek", 0), Error);
  CHECK_THROWS_AS(build_two_region_mesh(Geometry::cavity_halves, -1), Error);
}

TEST_CASE("mesh validation rejects bad input") {
  std::vector<Vec2> nodes{{0, 0}, {1, 0}, {0, 1}};
  std::vector<BoundaryEdge> edges{{{0, 1}, BoundaryMarker::outer_dirichlet},
                                  {{1, 2}, BoundaryMarker::outer_dirichlet},
                                  {{2, 0}, BoundaryMarker::outer_dirichlet}};
  CHECK_NOTHROW(Mesh(nodes, {{{0, 1, 2}, Subdomain::fluid}}, edges));
  CHECK_THROWS_AS(Mesh(nodes, {{{0, 2, 1}, Subdomain::fluid}}, edges), Error);
  CHECK_THROWS_AS(Mesh(nodes, {{{0, 1, 2}, Subdomain::fluid}}, {edges[0], edges[1]}), Error);
  // Interface marker without a partner on the other side.
  auto bad = edges;
  bad[0].marker = BoundaryMarker::interface;
  CHECK_THROWS_AS(Mesh(nodes, {{{0, 1, 2}, Subdomain::fluid}}, bad), Error);
}

TEST_CASE("mesh file round trip is bit exact") {
  const auto m = build_two_region_mesh(Geometry::channel_flag, 1);
  std::stringstream ss;
  write_mesh(ss, m);
  const auto text = ss.str();
  CHECK(text.rfind("nodes ", 0) == 0);
  const auto back = read_mesh(ss);
  REQUIRE(back.num_nodes() == m.num_nodes());
  for (Index v = 0; v < m.num_nodes(); ++v) CHECK(back.nodes()[v] == m.nodes()[v]);
  CHECK(back.interface_edges().size() == m.interface_edges().size());
  std::stringstream again;
  write_mesh(again, back);
  CHECK(again.str() == text);

  std::stringstream broken("nodes 3 triangles 1 edges 3\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(broken), Error);
}

TEST_CASE("ale extension: zero data and affine reproduction") {
  for (int level = 0; level <= 2; ++level) {
    auto mesh = shared(build_two_region_mesh(Geometry::cavity_halves, level));
    std::vector<Vec2> zero(static_cast<std::size_t>(mesh->num_nodes()));
    auto m0 = solve_ale_extension(mesh, zero);
    for (const auto& d : m0.displacement) CHECK(d == Vec2{});

    // g(x) = M x + c on every fluid boundary node.
    auto affine = [](Vec2 p) { return Vec2{0.03 * p.x - 0.02 * p.y + 0.01, 0.015 * p.x + 0.025 * p.y - 0.005}; };
    std::vector<Vec2> g(zero.size());
    for (Index v = 0; v < mesh->num_nodes(); ++v) g[v] = affine(mesh->nodes()[v]);
    for (auto kind : {ExtensionKind::laplacian, ExtensionKind::elasticity}) {
      ExtensionOptions opt;
      opt.op.kind = kind;
      opt.prescribe_all_boundary = true;
      auto mo = solve_ale_extension(mesh, g, opt);
      double err = 0.0;
      for (Index v = 0; v < mesh->num_nodes(); ++v)
        if (mesh->node_subdomain(v) == Subdomain::fluid) err = std::max(err, norm(mo.displacement[v] - g[v]));
      CHECK(err <= 1e-12);
      CHECK(mo.valid);
    }
  }
}

TEST_CASE("ale extension matches a dense oracle and is linear") {
  auto mesh = shared(build_two_region_mesh(Geometry::cavity_halves, 1));
  const auto datum = bump_datum(*mesh, 0.05);
  const auto motion = solve_ale_extension(mesh, datum);
  const auto oracle = dense_extension(*mesh, datum);
  double err = 0.0, scale = 0.0;
  for (Index v = 0; v < mesh->num_nodes(); ++v) {
    if (mesh->node_subdomain(v) != Subdomain::fluid) continue;
    err = std::max(err, norm(motion.displacement[v] - oracle[v]));
    scale = std::max(scale, norm(oracle[v]));
  }
  CHECK(err <= 1e-10 * scale);
  for (Index v = 0; v < mesh->num_nodes(); ++v) {
    if (mesh->on_interface(v) && mesh->node_subdomain(v) == Subdomain::fluid) CHECK(motion.displacement[v] == datum[v]);
    if (mesh->node_subdomain(v) == Subdomain::structure) CHECK(motion.displacement[v] == Vec2{});
  }

  auto scaled = datum;
  for (auto& d : scaled) d = -3.5 * d;
  const auto m2 = solve_ale_extension(mesh, scaled);
  double lin = 0.0;
  for (Index v = 0; v < mesh->num_nodes(); ++v) lin = std::max(lin, norm(m2.displacement[v] + 3.5 * motion.displacement[v]));
  CHECK(lin <= 1e-12 * 3.5 * scale);

  // Moved mesh: positive areas equal to a direct recomputation.
  const auto moved = move_mesh(motion);
  CHECK(moved.num_triangles() == mesh->num_triangles());
  double min_area = 1e300;
  for (Index t = 0; t < moved.num_triangles(); ++t) {
    CHECK(moved.triangles()[t].v == mesh->triangles()[t].v);
    if (moved.triangles()[t].tag != Subdomain::fluid) continue;
    const auto& v = mesh->triangles()[t].v;
    Vec2 p[3];
    for (int i = 0; i < 3; ++i) p[i] = mesh->nodes()[v[i]] + oracle[v[i]];
    const double a = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
    CHECK(moved.signed_area(t) == doctest::Approx(a).epsilon(1e-12));
    min_area = std::min(min_area, a);
  }
  CHECK(min_area > 0.0);
}

TEST_CASE("move mesh: zero motion, translation, rejection") {
  auto mesh = shared(build_two_region_mesh(Geometry::cavity_halves, 1));
  const auto same = move_mesh(identity_motion(mesh));
  for (Index v = 0; v < mesh->num_nodes(); ++v) CHECK(same.nodes()[v] == mesh->nodes()[v]);

  std::vector<Vec2> shift(static_cast<std::size_t>(mesh->num_nodes()), Vec2{0.125, -0.0625});
  const auto moved = move_mesh(make_motion(mesh, shift));
  for (Index t = 0; t < mesh->num_triangles(); ++t)
    CHECK(moved.signed_area(t) == doctest::Approx(mesh->signed_area(t)).epsilon(1e-14));
  for (Index v = 0; v < mesh->num_nodes(); ++v)
    if (mesh->node_subdomain(v) == Subdomain::structure) CHECK(moved.nodes()[v] == mesh->nodes()[v]);

  // Pull one interior fluid node far across its neighbours.
  std::vector<Vec2> fold(static_cast<std::size_t>(mesh->num_nodes()));
  for (Index v = 0; v < mesh->num_nodes(); ++v)
    if (mesh->node_subdomain(v) == Subdomain::fluid && !mesh->on_subdomain_boundary(v)) {
      fold[v] = {0.0, -0.4};
      break;
    }
  const auto bad = make_motion(mesh, fold);
  CHECK_FALSE(bad.valid);
  CHECK(bad.min_det <= 0.0);
  CHECK_THROWS_AS(move_mesh(bad), InvalidMotionError);
  CHECK(geometry_report(bad).min_det <= 0.0);
}

TEST_CASE("mesh velocity") {
  auto mesh = shared(build_two_region_mesh(Geometry::cavity_halves, 0));
  const auto n = static_cast<std::size_t>(mesh->num_nodes());
  const auto a = identity_motion(mesh);
  for (const auto& w : mesh_velocity(a, a, 0.1)) CHECK(w == Vec2{});
  const double k = 0.01;
  const Vec2 c{0.3, -0.7};
  const auto b = make_motion(mesh, std::vector<Vec2>(n, k * c));
  const auto w = mesh_velocity(a, b, k);
  for (Index v = 0; v < mesh->num_nodes(); ++v)
    if (mesh->node_subdomain(v) == Subdomain::fluid) CHECK(norm(w[v] - c) <= 1e-15);
  CHECK_THROWS_AS(mesh_velocity(a, b, 0.0), Error);

  auto m1 = solve_ale_extension(mesh, bump_datum(*mesh, 0.01));
  auto m2 = solve_ale_extension(mesh, bump_datum(*mesh, 0.03));
  const auto w2 = mesh_velocity(m1, m2, k);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(w2[i].x == (m2.displacement[i].x - m1.displacement[i].x) / k * 1.0);
  }
}

TEST_CASE("geometry report") {
  for (auto g : {Geometry::cavity_halves, Geometry::channel_flag})
    for (int level = 0; level <= 2; ++level) {
      auto mesh = shared(build_two_region_mesh(g, level));
      const auto r = geometry_report(identity_motion(mesh));
      CHECK(r.d0 == 1.0);
      CHECK(r.d1 == 1.0);
      CHECK(r.min_det == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(r.min_angle > 0.0);
    }

  auto mesh = shared(build_two_region_mesh(Geometry::cavity_halves, 1));
  std::vector<Vec2> stretch(static_cast<std::size_t>(mesh->num_nodes()));
  for (Index v = 0; v < mesh->num_nodes(); ++v) stretch[v] = {mesh->nodes()[v].x, 0.0};
  const auto r = geometry_report(make_motion(mesh, stretch));
  CHECK(r.d0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.d1 == 1.0);
  CHECK(r.min_det == doctest::Approx(2.0).epsilon(1e-14));

  // Per-element SVD oracle on an ALE motion.
  const auto motion = solve_ale_extension(mesh, bump_datum(*mesh, 0.05));
  const auto rep = geometry_report(motion);
  double d0 = 1.0, d1 = 1.0, mind = 1e300;
  for (Index t = 0; t < mesh->num_triangles(); ++t) {
    const auto& tri = mesh->triangles()[t];
    if (tri.tag != Subdomain::fluid) continue;
    Eigen::Matrix2d e, g;
    for (int i = 0; i < 2; ++i) {
      const Vec2 ex = mesh->nodes()[tri.v[i + 1]] - mesh->nodes()[tri.v[0]];
      const Vec2 gx = ex + motion.displacement[tri.v[i + 1]] - motion.displacement[tri.v[0]];
      e.col(i) << ex.x, ex.y;
      g.col(i) << gx.x, gx.y;
    }
    const Eigen::Matrix2d f = g * e.inverse();
    mind = std::min(mind, f.determinant());
    bool touches = false;
    for (Index v : tri.v) touches = touches || mesh->on_interface(v);
    if (!touches) continue;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(f);
    d0 = std::max(d0, svd.singularValues()(0));
    d1 = std::max(d1, 1.0 / f.determinant());
  }
  CHECK(std::abs(rep.d0 - d0) <= 1e-12);
  CHECK(std::abs(rep.d1 - d1) <= 1e-12);
  CHECK(std::abs(rep.min_det - mind) <= 1e-12);
  CHECK(rep.d0 > 1.0);
}
