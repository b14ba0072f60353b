#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fsi/analysis/dense_oracle.hpp"
#include "fsi/analysis/theory.hpp"
#include "fsi/meshkit/builders.hpp"

using namespace fsi;
using namespace fsi::analysis;
using fsisystem::Variant;
using krylov::ApplicationMode;
using krylov::PreconditionerKind;
using meshkit::Geometry;
using meshkit::Mesh;

namespace {

CoupledSpace space_of(Mesh m) { return femcore::build_space(std::make_shared<const Mesh>(std::move(m))); }

CoupledSpace cavity(int level) { return space_of(meshkit::build_two_region_mesh(Geometry::cavity_halves, level)); }

MaterialParams benchmark_params(double ratio, double k) {
  MaterialParams p;
  p.rho_f = 1e3;
  p.mu_f = 1.0;
  p.rho_s = ratio * 1e3;
  p.mu_s = 0.5e6;
  p.lambda_s = 2e6;
  p.k = k;
  return p;
}

Mesh all_dirichlet(const Mesh& m) {
  std::vector<meshkit::BoundaryEdge> edges(m.boundary_edges().begin(), m.boundary_edges().end());
  for (auto& e : edges) e.marker = meshkit::BoundaryMarker::outer_dirichlet;
  return Mesh({m.nodes().begin(), m.nodes().end()}, {m.triangles().begin(), m.triangles().end()}, std::move(edges));
}

double spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

}  // namespace

TEST_CASE("norm kind names") {
  for (auto k : {NormKind::V, NormKind::V_Q, NormKind::H1}) CHECK(parse_norm_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_norm_kind("L2"), Error);
}

TEST_CASE("inf-sup on a fluid-only square matches a dense SVD") {
  for (bool closed : {false, true}) {
    Mesh sq = meshkit::build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 3, 3);
    if (closed) sq = all_dirichlet(sq);
    const auto space = space_of(std::move(sq));
    MaterialParams p;
    const auto pb = make_theory_problem(space, p);
    CHECK(pb.r == 1.0);
    const auto rep = infsup_constant(pb, NormKind::H1);
    CHECK(rep.zero_modes == (closed ? 1 : 0));

    // Independent side: oracle matrices restricted to the free DOFs.
    const DenseOracle oracle(space);
    const auto& free = pb.blocks.free_dofs;
    const Eigen::MatrixXd h1f = oracle.h1(), bf = oracle.b();
    const Index nf = static_cast<Index>(free.size());
    Eigen::MatrixXd n(nf, nf), b(bf.rows(), nf);
    for (Index j = 0; j < nf; ++j) {
      b.col(j) = bf.col(free[j]);
      for (Index i = 0; i < nf; ++i) n(i, j) = h1f(free[i], free[j]);
    }
    const Eigen::VectorXd mp = oracle.mp();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ne(n);
    const Eigen::MatrixXd m = mp.cwiseSqrt().cwiseInverse().asDiagonal() * b * ne.operatorInverseSqrt();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double expect = sv[sv.size() - 1 - (closed ? 1 : 0)];
    CHECK(std::abs(rep.beta - expect) <= 1e-10 * expect);
    if (closed) CHECK(sv[sv.size() - 1] <= 1e-8 * sv[0]);
  }
}

TEST_CASE("inf-sup is invariant under a rigid rotation of the mesh") {
  const Mesh m = meshkit::build_two_region_mesh(Geometry::cavity_halves, 0);
  const double c = std::cos(0.7), s = std::sin(0.7);
  std::vector<meshkit::Vec2> rotated;
  for (const auto& x : m.nodes()) rotated.push_back({c * x.x - s * x.y + 3.0, s * x.x + c * x.y - 1.0});
  const Mesh mr(rotated, {m.triangles().begin(), m.triangles().end()},
                {m.boundary_edges().begin(), m.boundary_edges().end()});
  MaterialParams p;
  const auto b0 = infsup_constant(make_theory_problem(space_of(m), p), NormKind::H1).beta;
  const auto b1 = infsup_constant(make_theory_problem(space_of(mr), p), NormKind::H1).beta;
  CHECK(std::abs(b0 - b1) <= 1e-10 * b0);
}

TEST_CASE("inf-sup under refinement, unit parameters") {
  MaterialParams p;
  std::vector<double> beta;
  for (int level = 0; level <= 2; ++level) beta.push_back(infsup_constant(make_theory_problem(cavity(level), p), NormKind::V).beta);
  for (std::size_t i = 1; i < beta.size(); ++i) CHECK(beta[i] > 0.9 * beta[i - 1]);
}

TEST_CASE("inf-sup in the r-scaled norms is uniform over the parameter sweep") {
  const auto space = cavity(0);
  std::vector<double> bv, bq, bh;
  for (double k : {1e-2, 1e-3, 1e-4}) {
    for (double ratio : {1.0, 10.0, 100.0}) {
      const auto pb = make_theory_problem(space, benchmark_params(ratio, k));
      const auto v = infsup_constant(pb, NormKind::V);
      const auto q = infsup_constant(pb, NormKind::V_Q);
      CHECK(q.beta >= v.beta * (1.0 - 1e-12));
      CHECK(v.zero_modes == 0);
      bv.push_back(v.beta);
      bq.push_back(q.beta);
      bh.push_back(infsup_constant(pb, NormKind::H1).beta);
    }
  }
  CHECK(spread(bv) < 2.0);
  CHECK(spread(bq) < 2.0);
  // The unscaled H1 norm is not uniform in the material parameters.
  CHECK(spread(bh) > 2.0);
}

TEST_CASE("inf-sup size guard") {
  const auto pb = make_theory_problem(cavity(1), MaterialParams{});
  CHECK_THROWS_AS(infsup_constant(pb, NormKind::V, 10), Error);
}

TEST_CASE("spectrum with the exact inverse as preconditioner") {
  const auto pb = make_theory_problem(cavity(0), MaterialParams{});
  const auto sys = theory_system(pb, Variant::stabilized);
  const auto pc = fsisystem::make_preconditioner(sys, PreconditionerKind::M1, ApplicationMode::diagonal);
  const Index n = sys.size();
  Eigen::MatrixXd pinv(n, n);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0), z(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    pc.op.apply(e, z);
    e[j] = 0.0;
    for (Index i = 0; i < n; ++i) pinv(i, j) = z[i];
  }
  const Eigen::MatrixXd k = pinv.inverse();
  const auto rep = spectrum_of(k, [&](std::span<const double> in, std::span<double> out) { pc.op.apply(in, out); });
  for (auto l : rep.eigenvalues) {
    CHECK(std::abs(l.real() - 1.0) <= 1e-10);
    CHECK(std::abs(l.imag()) <= 1e-10);
  }
}

TEST_CASE("diagonal M1 spectrum lies in the Brezzi intervals") {
  const auto pb = make_theory_problem(cavity(0), MaterialParams{});
  const auto sys = theory_system(pb, Variant::stabilized);
  const auto rep = preconditioned_spectrum(sys, PreconditionerKind::M1, ApplicationMode::diagonal);
  REQUIRE(rep.brezzi);
  CHECK(rep.brezzi->pass);
  CHECK(rep.max_imag <= 1e-10);
  const double s5 = std::sqrt(5.0);
  for (auto l : rep.eigenvalues) {
    if (l.real() < 0.0) {
      CHECK(l.real() >= 0.5 * (1.0 - s5) - 1e-8);
    } else {
      CHECK(l.real() >= 1.0 - 1e-8);
      CHECK(l.real() <= 0.5 * (1.0 + s5) + 1e-8);
    }
  }
  // Velocity DOFs in the kernel of B give eigenvalue 1 exactly.
  int ones = 0;
  for (auto l : rep.eigenvalues) ones += std::abs(l.real() - 1.0) < 1e-9;
  CHECK(ones >= sys.nv() - sys.np());
}

TEST_CASE("brezzi interval formula") {
  const auto c = brezzi_intervals(1.0);
  CHECK(c.negative_lo == doctest::Approx(0.5 * (1.0 - std::sqrt(5.0))));
  CHECK(c.negative_hi == doctest::Approx(c.negative_lo));
  CHECK(c.positive_lo == 1.0);
  CHECK(c.positive_hi == doctest::Approx(0.5 * (1.0 + std::sqrt(5.0))));
  CHECK(brezzi_intervals(0.0).negative_hi == 0.0);
}

TEST_CASE("diagonal M1 condition estimate across r with unit parameters") {
  const auto space = cavity(0);
  std::vector<double> cond;
  for (double k : {1.0, 1e-2, 1e-4, 1e-6}) {
    MaterialParams p;
    p.k = k;
    const auto pb = make_theory_problem(space, p);
    const auto rep = preconditioned_spectrum(theory_system(pb, Variant::stabilized), PreconditionerKind::M1,
                                             ApplicationMode::diagonal);
    REQUIRE(rep.brezzi);
    CHECK(rep.brezzi->pass);
    cond.push_back(rep.condition);
  }
  CHECK(spread(cond) < 2.0);
}

TEST_CASE("M1 and M3 condition estimates over the material sweep") {
  const auto space = cavity(0);
  std::vector<double> c1, c3;
  for (double k : {1e-2, 1e-3, 1e-4}) {
    for (double ratio : {1.0, 10.0, 100.0}) {
      const auto pb = make_theory_problem(space, benchmark_params(ratio, k));
      const auto r1 = preconditioned_spectrum(theory_system(pb, Variant::stabilized), PreconditionerKind::M1,
                                              ApplicationMode::diagonal);
      const auto r3 = preconditioned_spectrum(theory_system(pb, Variant::augmented), PreconditionerKind::M3,
                                              ApplicationMode::diagonal);
      CHECK(r1.max_imag <= 1e-10);
      CHECK(r1.brezzi->pass);
      c1.push_back(r1.condition);
      c3.push_back(r3.condition);
    }
  }
  CHECK(spread(c1) < 2.0);
  CHECK(spread(c3) < 2.0);
}

TEST_CASE("triangular and SC spectra are finite") {
  const auto pb = make_theory_problem(cavity(0), benchmark_params(10.0, 1e-2));
  for (auto kind : {PreconditionerKind::M1, PreconditionerKind::M2, PreconditionerKind::M3, PreconditionerKind::SC}) {
    const auto sys = theory_system(pb, fsisystem::natural_variant(kind));
    const auto rep = preconditioned_spectrum(sys, kind, ApplicationMode::triangular);
    CHECK(rep.eigenvalues.size() == static_cast<std::size_t>(sys.size()));
    CHECK(std::isfinite(rep.condition));
    CHECK_FALSE(rep.brezzi.has_value());
  }
  CHECK_THROWS_AS(preconditioned_spectrum(theory_system(pb, Variant::plain), PreconditionerKind::M2,
                                          ApplicationMode::diagonal, 1e-6, 10),
                  Error);
}

TEST_CASE("norm identities") {
  const auto space = cavity(0);
  SUBCASE("r = 0 reduces both sides to a(u, u)") {
    const auto rep = norm_identity_check(space, MaterialParams{}, 0.0, 10);
    CHECK(rep.v_deviation <= 1e-13);
    CHECK(rep.vq_deviation <= 1e-13);
  }
  SUBCASE("random vectors") {
    for (double ratio : {1.0, 100.0}) {
      const auto p = benchmark_params(ratio, 1e-3);
      const auto rep = norm_identity_check(space, p, fsisystem::compute_r(p), 100, 7);
      CHECK(rep.samples == 100);
      CHECK(rep.worst() <= 1e-12);
    }
  }
  SUBCASE("divergence-free field: both norms coincide") {
    const DenseOracle oracle(space);
    const auto x = space.point_coordinates();
    Eigen::VectorXd u(space.num_velocity());
    for (Index i = 0; i < space.num_points; ++i) {
      u[CoupledSpace::dof(i, 0)] = -x[i].y + 0.3;
      u[CoupledSpace::dof(i, 1)] = x[i].x;
    }
    const auto p = benchmark_params(10.0, 1e-2);
    const double r = fsisystem::compute_r(p);
    const double v = oracle.v_norm_sq(u, p, r), q = oracle.vq_norm_sq(u, p, r);
    CHECK(std::abs(v - q) <= 1e-12 * v);
    const auto a = femcore::assemble_a(space, p);
    const auto d = femcore::assemble_d(space);
    const std::vector<double> uv(u.data(), u.data() + u.size());
    const auto du = d.multiply(uv);
    double udu = 0.0;
    for (std::size_t i = 0; i < uv.size(); ++i) udu += uv[i] * du[i];
    CHECK(std::abs(udu) <= 1e-12 * v);
  }
}

TEST_CASE("csv reports") {
  const auto pb = make_theory_problem(cavity(0), benchmark_params(10.0, 1e-2));
  std::vector<InfSupReport> rows{infsup_constant(pb, NormKind::V), infsup_constant(pb, NormKind::H1)};
  rows[0].level = 0;
  std::ostringstream os;
  write_infsup_csv(os, rows);
  const auto s = os.str();
  CHECK(s.rfind("level,k,", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
  CHECK(s.find(",V,") != std::string::npos);

  std::vector<SpectrumReport> sp{preconditioned_spectrum(theory_system(pb, Variant::stabilized),
                                                         PreconditionerKind::M1, ApplicationMode::diagonal)};
  std::ostringstream os2;
  write_spectrum_csv(os2, sp);
  CHECK(os2.str().find("M1,diagonal,") != std::string::npos);
  CHECK(os2.str().find(",yes") != std::string::npos);
}
