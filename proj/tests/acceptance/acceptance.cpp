// Acceptance gate: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fsi/analysis/dense_oracle.hpp"
#include "fsi/analysis/theory.hpp"
#include "fsi/bench/bench.hpp"
#include "fsi/femcore/assembly.hpp"
#include "fsi/fsisystem/time_loop.hpp"
#include "fsi/meshkit/builders.hpp"
#include "fsi/meshkit/motion.hpp"

using namespace fsi;
using analysis::to_dense;
using femcore::CoupledSpace;
using femcore::MaterialParams;
using krylov::ApplicationMode;
using krylov::PreconditionerKind;
using meshkit::Geometry;
using meshkit::Mesh;
using meshkit::Vec2;

namespace {

const std::vector<double> kSweepK{1e-2, 1e-3, 1e-4};
const std::vector<double> kSweepRatio{1.0, 10.0, 100.0};

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void note(bool ok, const std::string& text) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "FAIL  ") + text);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<const Mesh> shared(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

MaterialParams benchmark(double k, double ratio) {
  MaterialParams p;
  p.rho_f = 1e3;
  p.mu_f = 1.0;
  p.rho_s = ratio * 1e3;
  p.mu_s = 0.5e6;
  p.lambda_s = 2e6;
  p.k = k;
  return p;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<std::pair<std::string, std::shared_ptr<const Mesh>>> small_meshes() {
  std::vector<std::pair<std::string, std::shared_ptr<const Mesh>>> out;
  out.emplace_back("cavity_halves L0", shared(meshkit::build_two_region_mesh(Geometry::cavity_halves, 0)));
  out.emplace_back("rectangle 3x3", shared(meshkit::build_rectangle_mesh(0, 1, 0, 1, 3, 3)));
  out.emplace_back("rectangle 7x7", shared(meshkit::build_rectangle_mesh(0, 2, 0, 1, 7, 7)));
  std::vector<Vec2> nodes{{0, 0}, {1, 0}, {0, 1}};
  out.emplace_back("single triangle", shared(Mesh(nodes, {{{0, 1, 2}, meshkit::Subdomain::fluid}},
                                                  {{{0, 1}, meshkit::BoundaryMarker::outer_dirichlet},
                                                   {{1, 2}, meshkit::BoundaryMarker::outer_dirichlet},
                                                   {{2, 0}, meshkit::BoundaryMarker::outer_dirichlet}})));
  return out;
}

Outcome assembly_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  MaterialParams p;
  p.rho_f = 2.0;
  p.rho_s = 30.0;
  p.mu_f = 0.7;
  p.mu_s = 5.0;
  p.lambda_s = 11.0;
  p.k = 0.1;
  for (const auto& [name, mesh] : small_meshes()) {
    if (mesh->num_triangles() > 100) continue;
    const auto s = femcore::build_space(mesh);
    const analysis::DenseOracle oracle(s);
    const auto blk = femcore::assemble_blocks(s, p);
    const double ea = rel_err(to_dense(blk.a), oracle.a(p));
    const double eb = rel_err(to_dense(blk.b), oracle.b());
    const double ed = rel_err(to_dense(blk.d), oracle.d());
    const double em = rel_err(to_eigen(blk.mp), oracle.mp());
    const double eq = rel_err(to_dense(femcore::assemble_dq(blk.b, blk.mp)), oracle.dq());

    const auto n = static_cast<std::size_t>(s.num_velocity());
    const auto v = random_vector(n, rng);
    auto u = random_vector(n, rng);
    for (Index pt = 0; pt < s.num_points; ++pt)
      if (!s.structure_point[pt]) u[CoupledSpace::dof(pt, 0)] = u[CoupledSpace::dof(pt, 1)] = 0.0;
    std::vector<Vec2> w(static_cast<std::size_t>(mesh->num_nodes()));
    std::uniform_real_distribution<double> uw(-0.5, 0.5);
    for (auto& x : w) x = {uw(rng), uw(rng)};
    femcore::RhsInputs in;
    in.velocity = v;
    in.displacement = u;
    in.mesh_velocity = w;
    in.g_f = {0.3, -1.1};
    in.g_s = {-0.25, 4.0};
    const double er = rel_err(to_eigen(femcore::assemble_rhs(s, p, in)), oracle.rhs(p, in));
    const double worst = std::max({ea, eb, ed, em, eq, er});
    o.note(worst <= 1e-12, fmt("%-16s %3d triangles: A %.1e  B %.1e  D %.1e  Mp %.1e  DQ %.1e  rhs %.1e", name.c_str(),
                               static_cast<int>(mesh->num_triangles()), ea, eb, ed, em, eq, er));
  }
  return o;
}

Outcome norm_identities() {
  Outcome o;
  const auto s = femcore::build_space(shared(meshkit::build_two_region_mesh(Geometry::cavity_halves, 0)));
  double worst = 0.0;
  int samples = 0;
  std::uint64_t seed = 7;
  for (double k : kSweepK)
    for (double ratio : kSweepRatio) {
      const auto p = benchmark(k, ratio);
      const auto rep = analysis::norm_identity_check(s, p, fsisystem::compute_r(p), 100, seed++);
      worst = std::max(worst, rep.worst());
      samples += rep.samples;
    }
  const auto unit = analysis::norm_identity_check(s, MaterialParams{}, 1.0, 100, seed);
  worst = std::max(worst, unit.worst());
  samples += unit.samples;
  o.note(worst <= 1e-12, fmt("%d random vectors over 10 parameter sets, worst relative deviation %.2e", samples, worst));
  return o;
}

Outcome infsup() {
  Outcome o;
  std::vector<std::shared_ptr<const Mesh>> meshes;
  for (int l = 0; l <= 2; ++l) meshes.push_back(shared(meshkit::build_two_region_mesh(Geometry::cavity_halves, l)));
  std::vector<std::vector<double>> beta(3);
  for (int l = 0; l <= 2; ++l) {
    const auto s = femcore::build_space(meshes[l]);
    for (double k : kSweepK)
      for (double ratio : kSweepRatio)
        beta[l].push_back(analysis::infsup_constant(analysis::make_theory_problem(s, benchmark(k, ratio)),
                                                    analysis::NormKind::V)
                              .beta);
  }
  const auto [lo, hi] = std::minmax_element(beta[0].begin(), beta[0].end());
  o.note(spread(beta[0]) < 2.0,
         fmt("level 0 beta_V in [%.4f, %.4f] over k x ratio, variation %.3f (< 2)", *lo, *hi, spread(beta[0])));
  for (int l = 1; l <= 2; ++l) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < beta[l].size(); ++i) worst = std::min(worst, beta[l][i] / beta[l - 1][i]);
    o.note(worst > 0.9, fmt("level %d / level %d smallest beta ratio %.4f (decrease < 10%%)", l, l - 1, worst));
  }
  return o;
}

Outcome spectrum() {
  Outcome o;
  const auto s = femcore::build_space(shared(meshkit::build_two_region_mesh(Geometry::cavity_halves, 0)));
  std::vector<double> cond;
  double violation = 0.0, imag = 0.0;
  bool brezzi = true;
  for (double k : kSweepK)
    for (double ratio : kSweepRatio) {
      const auto pb = analysis::make_theory_problem(s, benchmark(k, ratio));
      const auto rep =
          analysis::preconditioned_spectrum(analysis::theory_system(pb, fsisystem::Variant::stabilized),
                                            PreconditionerKind::M1, ApplicationMode::diagonal, 1e-6);
      cond.push_back(rep.condition);
      imag = std::max(imag, rep.max_imag);
      brezzi = brezzi && rep.brezzi && rep.brezzi->pass;
      violation = std::max(violation, rep.brezzi ? rep.brezzi->worst_violation : 1.0);
    }
  const auto [lo, hi] = std::minmax_element(cond.begin(), cond.end());
  o.note(spread(cond) < 2.0, fmt("M1 diagonal condition in [%.3f, %.3f], variation %.3f (< 2)", *lo, *hi, spread(cond)));
  o.note(brezzi && violation <= 1e-6,
         fmt("Brezzi intervals hold, worst endpoint violation %.2e (tolerance 1e-6), max |imag| %.1e", violation, imag));
  return o;
}

Outcome iteration_table() {
  Outcome o;
  bench::BenchConfig c;
  c.levels = {0, 1, 2};
  c.k_values = kSweepK;
  c.density_ratios = kSweepRatio;
  c.tolerance = 1e-10;
  const auto t = bench::run_iteration_table(c);
  std::ostringstream txt;
  bench::write_table_text(txt, t);
  std::istringstream lines(txt.str());
  for (std::string line; std::getline(lines, line);) o.details.push_back("      " + line);

  auto counts = [&](PreconditionerKind kind) {
    std::vector<double> v;
    for (const auto& cell : t.cells)
      if (cell.kind == kind) v.push_back(cell.converged ? cell.iterations : std::numeric_limits<double>::infinity());
    return v;
  };
  auto at = [&](int level, double ratio, PreconditionerKind kind) {
    const auto& cell = t.find(level, 1e-2, ratio, kind);
    return cell.converged ? cell.iterations : std::numeric_limits<int>::max();
  };
  const auto m1 = counts(PreconditionerKind::M1), m2 = counts(PreconditionerKind::M2),
             m3 = counts(PreconditionerKind::M3);
  const double m1max = *std::max_element(m1.begin(), m1.end());
  const double m3max = *std::max_element(m3.begin(), m3.end());
  const double m2max = *std::max_element(m2.begin(), m2.end());
  // Max/min ratio with a zero-iteration cell counted as one.
  auto ratio = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / std::max(*lo, 1.0);
  };
  o.note(m1max <= 10 && ratio(m1) <= 3, fmt("(a) M1 max %g (<= 10), max/min %.2f (<= 3)", m1max, ratio(m1)));
  o.note(m3max <= 20 && ratio(m3) <= 3, fmt("(b) M3 max %g (<= 20), max/min %.2f (<= 3)", m3max, ratio(m3)));
  o.note(m2max <= 50, fmt("(c) M2 max %g (<= 50)", m2max));
  for (double r : kSweepRatio) {
    const int s0 = at(0, r, PreconditionerKind::SC), s1 = at(1, r, PreconditionerKind::SC),
              s2 = at(2, r, PreconditionerKind::SC);
    o.note(s0 < s1 && s1 < s2, fmt("(d) SC at k=1e-2, ratio %g over levels 0..2: %d, %d, %d (strictly increasing)",
                                   r, s0, s1, s2));
  }
  for (double r : kSweepRatio) {
    const int a = at(2, r, PreconditionerKind::M1), b = at(2, r, PreconditionerKind::M3),
              s = at(2, r, PreconditionerKind::SC);
    o.note(a <= b && b <= s, fmt("(e) level 2, k=1e-2, ratio %g: M1 %d <= M3 %d <= SC %d", r, a, b, s));
  }
  return o;
}

Outcome variant_equivalence() {
  Outcome o;
  auto mesh = shared(meshkit::build_two_region_mesh(Geometry::cavity_halves, 0));
  double worst = 0.0;
  for (double k : kSweepK)
    for (double ratio : kSweepRatio) {
      const auto p = benchmark(k, ratio);
      fsisystem::StepConfig cfg;
      cfg.inflow.peak = 1.0;
      cfg.g_s = {0.0, -2.0};
      const fsisystem::GceIntegrator g(mesh, p, cfg);
      const auto red = g.prepare(g.initial_state()).reduced;
      Eigen::VectorXd x[2];
      int i = 0;
      for (auto v : {fsisystem::Variant::plain, fsisystem::Variant::augmented}) {
        const auto s = fsisystem::build_system(red, p, v);
        const Index nv = s.nv(), np = s.np();
        Eigen::MatrixXd kk = Eigen::MatrixXd::Zero(nv + np, nv + np);
        kk.topLeftCorner(nv, nv) = to_dense(s.velocity_block);
        const Eigen::MatrixXd b = to_dense(s.b);
        kk.bottomLeftCorner(np, nv) = b;
        kk.topRightCorner(nv, np) = b.transpose();
        x[i++] = kk.partialPivLu().solve(to_eigen(s.rhs()));
      }
      worst = std::max(worst, (x[0] - x[1]).norm() / x[0].norm());
    }
  o.note(worst <= 1e-8, fmt("level 0, 9 parameter sets: worst relative difference %.2e (<= 1e-8)", worst));
  return o;
}

Outcome time_loop() {
  Outcome o;
  auto mesh = shared(meshkit::build_two_region_mesh(Geometry::cavity_halves, 0));
  const auto p = benchmark(1e-2, 10.0);
  {
    const fsisystem::GceIntegrator g(mesh, p, fsisystem::StepConfig{});
    auto s = g.initial_state();
    bool zero = true;
    for (int n = 0; n < 10; ++n) {
      s = g.step(s);
      for (const auto* v : {&s.velocity, &s.pressure, &s.displacement})
        for (double x : *v) zero = zero && x == 0.0;
    }
    o.note(zero, "zero data, 10 steps: velocity, pressure and displacement identically zero");
  }
  fsisystem::StepConfig cfg;
  cfg.inflow.peak = 1.0;
  auto run = [&](double* worst_div) {
    const fsisystem::GceIntegrator g(mesh, p, cfg);
    auto s = g.initial_state();
    std::string all;
    for (int n = 0; n < 5; ++n) {
      s = g.step(s);
      *worst_div = std::max(*worst_div, s.residual.divergence);
      std::ostringstream os;
      fsisystem::write_checkpoint(os, s);
      all += os.str();
    }
    return all;
  };
  double d1 = 0.0, d2 = 0.0;
  const auto a = run(&d1), b = run(&d2);
  o.note(d1 <= 1e-9, fmt("constant inflow, 5 steps: worst divergence residual %.2e (<= 1e-9)", d1));
  o.note(a == b && !a.empty(), fmt("two serial runs: checkpoints bit-identical (%zu bytes)", a.size()));
  return o;
}

Outcome ale() {
  Outcome o;
  auto affine = [](Vec2 x) { return Vec2{0.03 * x.x - 0.02 * x.y + 0.01, 0.015 * x.x + 0.025 * x.y - 0.005}; };
  double worst = 0.0;
  bool identity = true;
  int count = 0;
  for (auto geo : {Geometry::cavity_halves, Geometry::channel_flag})
    for (int level = 0; level <= 2; ++level) {
      auto mesh = shared(meshkit::build_two_region_mesh(geo, level));
      ++count;
      std::vector<Vec2> g(static_cast<std::size_t>(mesh->num_nodes()));
      for (Index v = 0; v < mesh->num_nodes(); ++v) g[v] = affine(mesh->nodes()[v]);
      for (auto kind : {meshkit::ExtensionKind::laplacian, meshkit::ExtensionKind::elasticity}) {
        meshkit::ExtensionOptions opt;
        opt.op.kind = kind;
        opt.prescribe_all_boundary = true;
        const auto m = meshkit::solve_ale_extension(mesh, g, opt);
        for (Index v = 0; v < mesh->num_nodes(); ++v)
          if (mesh->node_subdomain(v) == meshkit::Subdomain::fluid)
            worst = std::max(worst, meshkit::norm(m.displacement[v] - g[v]));
      }
      const auto r = meshkit::geometry_report(meshkit::identity_motion(mesh));
      identity = identity && r.d0 == 1.0 && r.d1 == 1.0;
    }
  o.note(worst <= 1e-12, fmt("affine data on %d meshes, both extension operators: max error %.2e (<= 1e-12)", count,
                             worst));
  o.note(identity, fmt("identity motion: geometry_report (d0, d1) = (1, 1) on all %d meshes", count));
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"assembly oracle equivalence", assembly_oracle},
      {"norm identities", norm_identities},
      {"inf-sup uniformity", infsup},
      {"spectral robustness", spectrum},
      {"iteration-count robustness", iteration_table},
      {"variant equivalence", variant_equivalence},
      {"time-loop sanity", time_loop},
      {"ALE exactness", ale},
  };
  int failed = 0, id = 0;
  for (const auto& [name, run] : criteria) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.note(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, secs);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %d criteria passed\n", id - failed, id);
  return failed;
}
