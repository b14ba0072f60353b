#include "fsi/krylov/block_preconditioner.hpp"

#include <string>

namespace fsi::krylov {

std::string_view to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::M1: return "M1";
    case PreconditionerKind::M2: return "M2";
    case PreconditionerKind::M3: return "M3";
    case PreconditionerKind::SC: return "SC";
  }
  return "?";
}

std::string_view to_string(ApplicationMode m) { return m == ApplicationMode::triangular ? "triangular" : "diagonal"; }

PreconditionerKind parse_preconditioner_kind(std::string_view s) {
  if (s == "M1" || s == "m1") return PreconditionerKind::M1;
  if (s == "M2" || s == "m2") return PreconditionerKind::M2;
  if (s == "M3" || s == "m3") return PreconditionerKind::M3;
  if (s == "SC" || s == "sc") return PreconditionerKind::SC;
  throw Error("unknown preconditioner '" + std::string(s) + "'");
}

ApplicationMode parse_application_mode(std::string_view s) {
  if (s == "triangular") return ApplicationMode::triangular;
  if (s == "diagonal") return ApplicationMode::diagonal;
  throw Error("unknown application mode '" + std::string(s) + "'");
}

BlockPreconditioner::BlockPreconditioner(const SaddleBlocks& blocks, PreconditionerKind kind, ApplicationMode mode)
    : kind_(kind), mode_(mode), b_(blocks.b) {
  if (!blocks.a || !blocks.b) throw Error("BlockPreconditioner: missing A or B block");
  const CsrMatrix& a = *blocks.a;
  const CsrMatrix& b = *blocks.b;
  nv_ = a.rows();
  np_ = b.rows();
  if (a.cols() != nv_ || b.cols() != nv_ || static_cast<Index>(blocks.mp.size()) != np_)
    throw Error("BlockPreconditioner: inconsistent block dimensions");
  for (double m : blocks.mp)
    if (!(m > 0.0)) throw Error("BlockPreconditioner: pressure mass must be positive");
  if (!(blocks.r > 0.0)) throw Error("BlockPreconditioner: r must be positive");

  std::vector<double> inv_mp(blocks.mp.size());
  for (std::size_t i = 0; i < inv_mp.size(); ++i) inv_mp[i] = 1.0 / blocks.mp[i];

  switch (kind) {
    case PreconditionerKind::M1:
      if (!blocks.d) throw Error("BlockPreconditioner: M1 needs the div-div block");
      velocity_block_ = add(a, blocks.r, *blocks.d);
      break;
    case PreconditionerKind::M2:
    case PreconditionerKind::M3:
      velocity_block_ = add(a, blocks.r, weighted_gram(b, inv_mp));
      break;
    case PreconditionerKind::SC:
      velocity_block_ = a;
      break;
  }
  velocity_lu_ = std::make_shared<const SparseLU>(velocity_block_);

  if (kind == PreconditionerKind::SC) {
    std::vector<double> inv_diag = a.diagonal_values();
    for (double& v : inv_diag) {
      if (v == 0.0) throw Error("BlockPreconditioner: zero diagonal entry in A");
      v = 1.0 / v;
    }
    CsrMatrix bd = multiply(b, CsrMatrix::diagonal(inv_diag));
    CsrMatrix pos = multiply(bd, b.transpose());
    pressure_block_ = pos.scaled(-1.0);
    if (np_ > 0) pressure_lu_ = std::make_shared<const SparseLU>(pos);
  } else {
    std::vector<double> s(blocks.mp.begin(), blocks.mp.end());
    pressure_scale_.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      pressure_scale_[i] = blocks.r / s[i];
      s[i] /= blocks.r;
    }
    pressure_block_ = CsrMatrix::diagonal(s);
  }
}

void BlockPreconditioner::solve_velocity(std::span<const double> rhs, std::span<double> out) const {
  velocity_lu_->solve(rhs, out);
}

void BlockPreconditioner::solve_pressure(std::span<const double> rhs, std::span<double> out) const {
  if (kind_ == PreconditionerKind::SC) {
    if (np_ == 0) return;
    pressure_lu_->solve(rhs, out);
    for (double& v : out) v = -v;
  } else {
    for (Index i = 0; i < np_; ++i) out[i] = pressure_scale_[i] * rhs[i];
  }
}

void BlockPreconditioner::apply(std::span<const double> residual, std::span<double> z) const {
  if (static_cast<Index>(residual.size()) != nv_ + np_ || residual.size() != z.size())
    throw Error("BlockPreconditioner::apply: size mismatch");
  auto rv = residual.first(static_cast<std::size_t>(nv_));
  auto rp = residual.subspan(static_cast<std::size_t>(nv_));
  auto zv = z.first(static_cast<std::size_t>(nv_));
  auto zp = z.subspan(static_cast<std::size_t>(nv_));
  solve_pressure(rp, zp);
  if (mode_ == ApplicationMode::diagonal) {
    solve_velocity(rv, zv);
    return;
  }
  std::vector<double> t(static_cast<std::size_t>(nv_));
  b_->multiply_transpose(zp, t);
  for (Index i = 0; i < nv_; ++i) t[i] = rv[i] - t[i];
  solve_velocity(t, zv);
}

}  // namespace fsi::krylov
