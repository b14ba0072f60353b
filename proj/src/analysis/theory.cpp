#include "fsi/analysis/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "fsi/analysis/dense_oracle.hpp"
#include "fsi/krylov/sparse_lu.hpp"

namespace fsi::analysis {

std::string_view to_string(NormKind k) {
  switch (k) {
    case NormKind::V: return "V";
    case NormKind::V_Q: return "V_Q";
    case NormKind::H1: return "H1";
  }
  return "?";
}

NormKind parse_norm_kind(std::string_view s) {
  if (s == "V") return NormKind::V;
  if (s == "V_Q" || s == "VQ") return NormKind::V_Q;
  if (s == "H1") return NormKind::H1;
  throw Error("unknown norm kind '" + std::string(s) + "'");
}

TheoryProblem make_theory_problem(const CoupledSpace& space, const MaterialParams& params) {
  params.validate();
  TheoryProblem pb;
  const auto blocks = femcore::assemble_blocks(space, params);
  const std::vector<double> zero(static_cast<std::size_t>(space.num_velocity()), 0.0);
  pb.blocks = femcore::apply_dirichlet(blocks, zero, space.dirichlet_dofs);
  pb.h1 = femcore::assemble_h1_gram(space).submatrix(pb.blocks.free_dofs, pb.blocks.free_dofs);
  pb.params = params;
  pb.r = fsisystem::compute_r(params);
  return pb;
}

fsisystem::BlockSystem theory_system(const TheoryProblem& problem, fsisystem::Variant variant) {
  return fsisystem::build_system(problem.blocks, problem.r, variant);
}

InfSupReport infsup_constant(const CsrMatrix& gram, const CsrMatrix& b, std::span<const double> mp, double r,
                             Index max_pressure_dofs) {
  const Index nv = gram.rows(), np = b.rows();
  if (gram.cols() != nv || b.cols() != nv || static_cast<Index>(mp.size()) != np)
    throw Error("infsup_constant: inconsistent block dimensions");
  if (np > max_pressure_dofs)
    throw Error("infsup_constant: " + std::to_string(np) + " pressure DOFs exceed the dense limit " +
                std::to_string(max_pressure_dofs));
  if (!(r > 0.0)) throw Error("infsup_constant: r must be positive");
  if (np == 0) throw Error("infsup_constant: empty pressure space");

  std::optional<krylov::SparseLU> lu;
  try {
    lu.emplace(gram);
  } catch (const krylov::SingularMatrixError& e) {
    throw Error(std::string("infsup_constant: Gram matrix is singular: ") + e.what());
  }

  // S = B N^{-1} B', one column per pressure DOF.
  const CsrMatrix bt = b.transpose();
  Eigen::MatrixXd s(np, np);
  std::vector<double> col(static_cast<std::size_t>(nv)), x(static_cast<std::size_t>(nv)),
      y(static_cast<std::size_t>(np));
  const auto rp = bt.row_ptr();
  const auto ci = bt.col_idx();
  const auto vals = bt.values();
  std::vector<std::vector<std::pair<Index, double>>> bcols(static_cast<std::size_t>(np));
  for (Index i = 0; i < nv; ++i)
    for (Index k = rp[i]; k < rp[i + 1]; ++k) bcols[ci[k]].push_back({i, vals[k]});
  for (Index j = 0; j < np; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    for (auto [i, v] : bcols[j]) col[i] = v;
    lu->solve(col, x);
    b.multiply(x, y);
    for (Index i = 0; i < np; ++i) s(i, j) = y[i];
  }
  Eigen::VectorXd w(np);
  for (Index i = 0; i < np; ++i) {
    if (!(mp[i] > 0.0)) throw Error("infsup_constant: pressure mass must be positive");
    w[i] = 1.0 / std::sqrt(mp[i]);
  }
  const Eigen::MatrixXd c = r * (w.asDiagonal() * (0.5 * (s + s.transpose())) * w.asDiagonal());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error("infsup_constant: eigensolver failed");
  const auto& lam = eig.eigenvalues();

  InfSupReport rep;
  rep.r = r;
  rep.velocity_dofs = nv;
  rep.pressure_dofs = np;
  rep.lambda_max = lam[np - 1];
  const double cut = 1e-10 * rep.lambda_max;
  for (Index i = 0; i < np; ++i) {
    if (lam[i] <= cut) {
      ++rep.zero_modes;
      continue;
    }
    rep.beta = std::sqrt(lam[i]);
    break;
  }
  return rep;
}

InfSupReport infsup_constant(const TheoryProblem& pb, NormKind norm, Index max_pressure_dofs) {
  const auto& bl = pb.blocks;
  CsrMatrix gram;
  switch (norm) {
    case NormKind::V: gram = krylov::add(bl.a, pb.r, bl.d); break;
    case NormKind::V_Q: gram = krylov::add(bl.a, pb.r, femcore::assemble_dq(bl.b, bl.mp)); break;
    case NormKind::H1: gram = pb.h1; break;
  }
  auto rep = infsup_constant(gram, bl.b, bl.mp, pb.r, max_pressure_dofs);
  rep.norm = norm;
  rep.params = pb.params;
  return rep;
}

BrezziCheck brezzi_intervals(double beta) {
  BrezziCheck c;
  c.beta = beta;
  const double s5 = std::sqrt(5.0);
  c.negative_lo = 0.5 * (1.0 - s5);
  c.negative_hi = 0.5 * (1.0 - std::sqrt(1.0 + 4.0 * beta * beta));
  c.positive_lo = 1.0;
  c.positive_hi = 0.5 * (1.0 + s5);
  return c;
}

namespace {

bool is_symmetric(const Eigen::MatrixXd& m, double rel) {
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel * scale;
}

}  // namespace

SpectrumReport spectrum_of(const Eigen::MatrixXd& k, const krylov::LinearOperator& precond) {
  const Index n = static_cast<Index>(k.rows());
  if (k.cols() != n) throw Error("spectrum_of: operator must be square");
  Eigen::MatrixXd pinv(n, n);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0), z(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    precond(e, z);
    e[j] = 0.0;
    for (Index i = 0; i < n; ++i) pinv(i, j) = z[i];
  }

  SpectrumReport rep;
  bool done = false;
  if (is_symmetric(k, 1e-12) && is_symmetric(pinv, 1e-9)) {
    const Eigen::MatrixXd ps = 0.5 * (pinv + pinv.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(ps);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd l = llt.matrixL();
      const Eigen::MatrixXd ks = 0.5 * (k + k.transpose());
      Eigen::MatrixXd m = l.transpose() * ks * l;
      m = 0.5 * (m + m.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
      if (eig.info() == Eigen::Success) {
        for (Index i = 0; i < n; ++i) rep.eigenvalues.emplace_back(eig.eigenvalues()[i], 0.0);
        done = true;
      }
    }
  }
  if (!done) {
    Eigen::EigenSolver<Eigen::MatrixXd> eig(k * pinv, false);
    if (eig.info() != Eigen::Success) throw Error("spectrum_of: eigensolver failed");
    for (Index i = 0; i < n; ++i) rep.eigenvalues.push_back(eig.eigenvalues()[i]);
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (auto l : rep.eigenvalues) {
    lo = std::min(lo, std::abs(l));
    hi = std::max(hi, std::abs(l));
    rep.max_imag = std::max(rep.max_imag, std::abs(l.imag()));
  }
  rep.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return rep;
}

SpectrumReport preconditioned_spectrum(const fsisystem::BlockSystem& system, krylov::PreconditionerKind kind,
                                       krylov::ApplicationMode mode, double brezzi_tolerance, Index max_size) {
  const Index n = system.size();
  if (n > max_size)
    throw Error("preconditioned_spectrum: " + std::to_string(n) + " unknowns exceed the dense limit " +
                std::to_string(max_size));
  Eigen::MatrixXd k(n, n);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0), y(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    system.apply(e, y);
    e[j] = 0.0;
    for (Index i = 0; i < n; ++i) k(i, j) = y[i];
  }
  const auto pc = fsisystem::make_preconditioner(system, kind, mode);
  auto rep = spectrum_of(k, [&](std::span<const double> in, std::span<double> out) { pc.op.apply(in, out); });
  rep.kind = kind;
  rep.mode = mode;
  rep.r = system.r;

  if (kind == krylov::PreconditionerKind::M1 && mode == krylov::ApplicationMode::diagonal &&
      system.variant == fsisystem::Variant::stabilized) {
    const auto inf = infsup_constant(system.velocity_block, system.b, system.mp, system.r);
    auto c = brezzi_intervals(inf.beta);
    for (auto l : rep.eigenvalues) {
      const double x = l.real();
      double v;
      if (x < 0.0)
        v = std::max({c.negative_lo - x, x - c.negative_hi, 0.0});
      else
        v = std::max({c.positive_lo - x, x - c.positive_hi, 0.0});
      c.worst_violation = std::max({c.worst_violation, v, std::abs(l.imag())});
    }
    c.pass = c.worst_violation <= brezzi_tolerance;
    rep.brezzi = c;
  }
  return rep;
}

NormIdentityReport norm_identity_check(const CoupledSpace& space, const MaterialParams& params, double r,
                                       int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw Error("norm_identity_check: sample_count must be positive");
  if (!(r >= 0.0)) throw Error("norm_identity_check: r must be nonnegative");
  const auto a = femcore::assemble_a(space, params);
  const auto d = femcore::assemble_d(space);
  const auto b = femcore::assemble_b(space);
  const auto mp = femcore::assemble_mp(space);
  const auto dq = femcore::dq_operator(b, mp);
  const DenseOracle oracle(space);

  const auto n = static_cast<std::size_t>(space.num_velocity());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(n), au(n), du(n), qu(n);
  NormIdentityReport rep;
  rep.samples = sample_count;
  auto dot = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  };
  for (int t = 0; t < sample_count; ++t) {
    for (auto& x : u) x = dist(rng);
    a.multiply(u, au);
    d.multiply(u, du);
    dq(u, qu);
    const double ua = dot(u, au);
    const double lhs_v = ua + r * dot(u, du);
    const double lhs_q = ua + r * dot(u, qu);
    const Eigen::Map<const Eigen::VectorXd> ue(u.data(), static_cast<Index>(n));
    const double rhs_v = oracle.v_norm_sq(ue, params, r);
    const double rhs_q = oracle.vq_norm_sq(ue, params, r);
    rep.v_deviation = std::max(rep.v_deviation, std::abs(lhs_v - rhs_v) / std::abs(rhs_v));
    rep.vq_deviation = std::max(rep.vq_deviation, std::abs(lhs_q - rhs_q) / std::abs(rhs_q));
  }
  return rep;
}

void write_infsup_csv(std::ostream& os, std::span<const InfSupReport> rows) {
  const auto old = os.precision(12);
  os << "level,k,rho_f,rho_s,mu_f,mu_s,lambda_s,norm,r,beta,zero_modes,velocity_dofs,pressure_dofs\n";
  for (const auto& x : rows) {
    const auto& p = x.params;
    os << x.level << ',' << p.k << ',' << p.rho_f << ',' << p.rho_s << ',' << p.mu_f << ',' << p.mu_s << ','
       << p.lambda_s << ',' << to_string(x.norm) << ',' << x.r << ',' << x.beta << ',' << x.zero_modes << ','
       << x.velocity_dofs << ',' << x.pressure_dofs << '\n';
  }
  os.precision(old);
}

void write_spectrum_csv(std::ostream& os, std::span<const SpectrumReport> rows) {
  const auto old = os.precision(12);
  os << "preconditioner,mode,k,rho_f,rho_s,r,size,condition,min_abs,max_abs,max_imag,brezzi_beta,brezzi_violation,"
        "brezzi_pass\n";
  for (const auto& x : rows) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto l : x.eigenvalues) {
      lo = std::min(lo, std::abs(l));
      hi = std::max(hi, std::abs(l));
    }
    os << krylov::to_string(x.kind) << ',' << krylov::to_string(x.mode) << ',' << x.params.k << ','
       << x.params.rho_f << ',' << x.params.rho_s << ',' << x.r << ',' << x.eigenvalues.size() << ','
       << x.condition << ',' << lo << ',' << hi << ',' << x.max_imag << ',';
    if (x.brezzi)
      os << x.brezzi->beta << ',' << x.brezzi->worst_violation << ',' << (x.brezzi->pass ? "yes" : "no");
    else
      os << ",,";
    os << '\n';
  }
  os.precision(old);
}

}  // namespace fsi::analysis
