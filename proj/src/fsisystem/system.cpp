#include "fsi/fsisystem/system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fsi::fsisystem {

double compute_r(const MaterialParams& p) {
  return std::max({1.0, p.mu_f, p.rho_f / p.k, p.rho_s / p.k, p.k * p.mu_s, p.k * p.lambda_s});
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::plain: return "plain";
    case Variant::stabilized: return "stabilized";
    case Variant::augmented: return "augmented";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "plain") return Variant::plain;
  if (s == "stabilized") return Variant::stabilized;
  if (s == "augmented") return Variant::augmented;
  throw Error("unknown system variant '" + std::string(s) + "'");
}

Variant natural_variant(krylov::PreconditionerKind kind) {
  switch (kind) {
    case krylov::PreconditionerKind::M1: return Variant::stabilized;
    case krylov::PreconditionerKind::M3: return Variant::augmented;
    default: return Variant::plain;
  }
}

void BlockSystem::apply(std::span<const double> x, std::span<double> y) const {
  const auto n = static_cast<std::size_t>(nv());
  auto yv = y.first(n);
  auto yp = y.subspan(n);
  velocity_block.multiply(x.first(n), yv);
  std::vector<double> t(n);
  b.multiply_transpose(x.subspan(n), t);
  for (std::size_t i = 0; i < n; ++i) yv[i] += t[i];
  b.multiply(x.first(n), yp);
}

std::vector<double> BlockSystem::rhs() const {
  std::vector<double> r(rhs_velocity);
  r.insert(r.end(), rhs_pressure.begin(), rhs_pressure.end());
  return r;
}

krylov::SaddleBlocks BlockSystem::saddle_blocks() const { return {&a, &d, &b, mp, r}; }

BlockSystem build_system(const femcore::ReducedBlocks& blocks, const MaterialParams& params, Variant variant) {
  params.validate();
  return build_system(blocks, compute_r(params), variant);
}

BlockSystem build_system(const femcore::ReducedBlocks& blocks, double r, Variant variant) {
  const Index n = blocks.num_free();
  if (blocks.a.rows() != n || blocks.d.rows() != n || blocks.b.cols() != n ||
      static_cast<Index>(blocks.mp.size()) != blocks.b.rows() || static_cast<Index>(blocks.rhs.size()) != n ||
      static_cast<Index>(blocks.lift_b.size()) != blocks.b.rows())
    throw Error("build_system: inconsistent block dimensions");
  if (!(r >= 0.0)) throw Error("build_system: r must be nonnegative");

  BlockSystem s;
  s.variant = variant;
  s.r = r;
  s.a = blocks.a;
  s.d = blocks.d;
  s.b = blocks.b;
  s.mp = blocks.mp;
  s.rhs_velocity = blocks.rhs;
  s.rhs_pressure.resize(blocks.lift_b.size());
  for (std::size_t i = 0; i < blocks.lift_b.size(); ++i) s.rhs_pressure[i] = -blocks.lift_b[i];

  switch (variant) {
    case Variant::plain:
      s.velocity_block = blocks.a;
      break;
    case Variant::stabilized:
      s.velocity_block = krylov::add(blocks.a, r, blocks.d);
      for (Index i = 0; i < n; ++i) s.rhs_velocity[i] -= r * blocks.lift_d[i];
      break;
    case Variant::augmented: {
      s.velocity_block = krylov::add(blocks.a, r, femcore::assemble_dq(blocks.b, blocks.mp));
      std::vector<double> t(blocks.lift_b.size());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = blocks.lift_b[i] / blocks.mp[i];
      std::vector<double> bt(static_cast<std::size_t>(n));
      blocks.b.multiply_transpose(t, bt);
      for (Index i = 0; i < n; ++i) s.rhs_velocity[i] -= r * bt[i];
      break;
    }
  }
  return s;
}

ResidualNorms residual(const BlockSystem& s, std::span<const double> v, std::span<const double> p) {
  if (static_cast<Index>(v.size()) != s.nv() || static_cast<Index>(p.size()) != s.np())
    throw Error("residual: vector sizes do not match the system");
  std::vector<double> x(v.begin(), v.end());
  x.insert(x.end(), p.begin(), p.end());
  std::vector<double> kx(x.size());
  s.apply(x, kx);
  ResidualNorms r;
  for (Index i = 0; i < s.nv(); ++i) r.velocity += std::pow(s.rhs_velocity[i] - kx[i], 2);
  for (Index i = 0; i < s.np(); ++i) r.divergence += std::pow(s.rhs_pressure[i] - kx[s.nv() + i], 2);
  r.velocity = std::sqrt(r.velocity);
  r.divergence = std::sqrt(r.divergence);
  return r;
}

Preconditioner make_preconditioner(const BlockSystem& system, krylov::PreconditionerKind kind,
                                   krylov::ApplicationMode mode) {
  std::optional<std::string> warning;
  if (natural_variant(kind) != system.variant)
    warning = std::string(krylov::to_string(kind)) + " is designed for the " +
              std::string(to_string(natural_variant(kind))) + " system, got " +
              std::string(to_string(system.variant));
  // M1-M3 need r > 0 for the pressure scaling even when the system used r = 0.
  auto blocks = system.saddle_blocks();
  if (blocks.r == 0.0) blocks.r = 1.0;
  return {krylov::BlockPreconditioner(blocks, kind, mode), std::move(warning)};
}

Solution solve(const BlockSystem& system, const Preconditioner& precond, const krylov::GmresOptions& options) {
  return solve(system, precond, system.rhs(), options);
}

Solution solve(const BlockSystem& system, const Preconditioner& precond, std::span<const double> rhs,
               const krylov::GmresOptions& options) {
  if (static_cast<Index>(rhs.size()) != system.size()) throw Error("solve: right-hand side size mismatch");
  std::vector<double> x(rhs.size(), 0.0);
  krylov::LinearOperator op = [&](std::span<const double> in, std::span<double> out) { system.apply(in, out); };
  krylov::LinearOperator pc = [&](std::span<const double> in, std::span<double> out) { precond.op.apply(in, out); };
  Solution sol;
  sol.report = krylov::gmres(op, pc, rhs, x, options);
  sol.report.preconditioner = std::string(krylov::to_string(precond.op.kind()));
  sol.report.variant = std::string(to_string(system.variant));
  const auto nv = static_cast<std::size_t>(system.nv());
  sol.velocity.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nv));
  sol.pressure.assign(x.begin() + static_cast<std::ptrdiff_t>(nv), x.end());
  return sol;
}

}  // namespace fsi::fsisystem
