#include "fsi/femcore/assembly.hpp"

#include <cmath>

#include "fsi/femcore/p2.hpp"

namespace fsi::femcore {

using krylov::Triplet;
using meshkit::Subdomain;

void MaterialParams::validate() const {
  for (double v : {rho_f, rho_s, mu_f, mu_s, lambda_s, k})
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("MaterialParams: all parameters must be positive and finite");
}

namespace {

constexpr int kQ = 7;

// Shape function values and physical gradients at the quadrature points of
// one triangle; w[q] already includes the element area.
struct ElementBasis {
  double area = 0.0;
  double w[kQ];
  double n[kQ][6];
  double gx[kQ][6];
  double gy[kQ][6];
  double lambda[kQ][3];
};

struct Tables {
  double n[kQ][6];
  double dxi[kQ][6];
  double deta[kQ][6];
  double lambda[kQ][3];
  double w[kQ];
};

const Tables& tables() {
  static const Tables t = [] {
    Tables t{};
    const auto rule = triangle_rule();
    for (int q = 0; q < kQ; ++q) {
      const auto v = p2_values(rule[q].xi, rule[q].eta);
      const auto g = p2_gradients(rule[q].xi, rule[q].eta);
      for (int i = 0; i < 6; ++i) {
        t.n[q][i] = v[i];
        t.dxi[q][i] = g[i][0];
        t.deta[q][i] = g[i][1];
      }
      t.lambda[q][0] = 1.0 - rule[q].xi - rule[q].eta;
      t.lambda[q][1] = rule[q].xi;
      t.lambda[q][2] = rule[q].eta;
      t.w[q] = rule[q].weight;
    }
    return t;
  }();
  return t;
}

void element_basis(const Mesh& mesh, Index t, ElementBasis& eb) {
  const auto& v = mesh.triangles()[t].v;
  const Vec2 p0 = mesh.nodes()[v[0]], p1 = mesh.nodes()[v[1]], p2 = mesh.nodes()[v[2]];
  const double j00 = p1.x - p0.x, j01 = p2.x - p0.x, j10 = p1.y - p0.y, j11 = p2.y - p0.y;
  const double det = j00 * j11 - j01 * j10;
  if (!(det > 0.0)) throw Error("assembly: degenerate or inverted triangle " + std::to_string(t));
  eb.area = 0.5 * det;
  const Tables& tb = tables();
  for (int q = 0; q < kQ; ++q) {
    eb.w[q] = tb.w[q] * eb.area;
    for (int i = 0; i < 6; ++i) {
      eb.n[q][i] = tb.n[q][i];
      eb.gx[q][i] = (j11 * tb.dxi[q][i] - j10 * tb.deta[q][i]) / det;
      eb.gy[q][i] = (-j01 * tb.dxi[q][i] + j00 * tb.deta[q][i]) / det;
    }
    for (int i = 0; i < 3; ++i) eb.lambda[q][i] = tb.lambda[q][i];
  }
}

// Local 12x12 matrix, local dof 2*i + c.
using Local = double[12][12];

struct FormWeights {
  double mass = 0.0;
  double strain = 0.0;
  double divdiv = 0.0;
  double grad = 0.0;  // full gradient form (H1)
};

void local_matrix(const ElementBasis& eb, const FormWeights& fw, Local& m) {
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) m[r][c] = 0.0;
  for (int q = 0; q < kQ; ++q) {
    const double w = eb.w[q];
    for (int i = 0; i < 6; ++i) {
      const double gi[2] = {eb.gx[q][i], eb.gy[q][i]};
      for (int j = i; j < 6; ++j) {
        const double gj[2] = {eb.gx[q][j], eb.gy[q][j]};
        const double mass = eb.n[q][i] * eb.n[q][j];
        const double gg = gi[0] * gj[0] + gi[1] * gj[1];
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            // eps(N_i e_a) : eps(N_j e_b) = (delta_ab grad.grad + d_b N_i d_a N_j) / 2
            double v = fw.strain * 0.5 * ((a == b ? gg : 0.0) + gi[b] * gj[a]);
            v += fw.divdiv * (gi[a] * gj[b]);
            if (a == b) v += fw.mass * mass + fw.grad * gg;
            m[2 * i + a][2 * j + b] += w * v;
          }
      }
    }
  }
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < i; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) m[2 * i + a][2 * j + b] = m[2 * j + b][2 * i + a];
}

template <class WeightFn>
CsrMatrix assemble_velocity_form(const CoupledSpace& space, WeightFn&& weights) {
  const Mesh& mesh = *space.mesh;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 144);
  ElementBasis eb;
  Local m;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const FormWeights fw = weights(mesh.triangles()[t].tag);
    if (fw.mass == 0.0 && fw.strain == 0.0 && fw.divdiv == 0.0 && fw.grad == 0.0) continue;
    element_basis(mesh, t, eb);
    local_matrix(eb, fw, m);
    const auto& ep = space.element_points[t];
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c)
        trip.push_back({CoupledSpace::dof(ep[r / 2], r % 2), CoupledSpace::dof(ep[c / 2], c % 2), m[r][c]});
  }
  const Index n = space.num_velocity();
  return CsrMatrix::from_triplets(n, n, std::move(trip));
}

}  // namespace

CsrMatrix assemble_a(const CoupledSpace& space, const MaterialParams& p) {
  if (!(p.k > 0.0)) throw Error("assemble_a: time step must be positive");
  return assemble_velocity_form(space, [&](Subdomain s) {
    FormWeights fw;
    if (s == Subdomain::fluid) {
      fw.mass = p.rho_f / p.k;
      fw.strain = p.mu_f;
    } else {
      fw.mass = p.rho_s / p.k;
      fw.strain = p.k * p.mu_s;
      fw.divdiv = p.k * p.lambda_s;
    }
    return fw;
  });
}

CsrMatrix assemble_d(const CoupledSpace& space) {
  return assemble_velocity_form(space, [](Subdomain s) {
    FormWeights fw;
    if (s == Subdomain::fluid) fw.divdiv = 1.0;
    return fw;
  });
}

CsrMatrix assemble_structure_stiffness(const CoupledSpace& space, const MaterialParams& p) {
  return assemble_velocity_form(space, [&](Subdomain s) {
    FormWeights fw;
    if (s == Subdomain::structure) {
      fw.strain = p.mu_s;
      fw.divdiv = p.lambda_s;
    }
    return fw;
  });
}

CsrMatrix assemble_h1_gram(const CoupledSpace& space) {
  return assemble_velocity_form(space, [](Subdomain) {
    FormWeights fw;
    fw.mass = 1.0;
    fw.grad = 1.0;
    return fw;
  });
}

CsrMatrix assemble_b(const CoupledSpace& space) {
  const Mesh& mesh = *space.mesh;
  std::vector<Triplet> trip;
  ElementBasis eb;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Index row = space.pressure_dof[t];
    if (row < 0) continue;
    element_basis(mesh, t, eb);
    double bx[6] = {}, by[6] = {};
    for (int q = 0; q < kQ; ++q)
      for (int i = 0; i < 6; ++i) {
        bx[i] += eb.w[q] * eb.gx[q][i];
        by[i] += eb.w[q] * eb.gy[q][i];
      }
    const auto& ep = space.element_points[t];
    for (int i = 0; i < 6; ++i) {
      trip.push_back({row, CoupledSpace::dof(ep[i], 0), bx[i]});
      trip.push_back({row, CoupledSpace::dof(ep[i], 1), by[i]});
    }
  }
  return CsrMatrix::from_triplets(space.num_pressure, space.num_velocity(), std::move(trip));
}

std::vector<double> assemble_mp(const CoupledSpace& space) {
  std::vector<double> mp(static_cast<std::size_t>(space.num_pressure));
  for (Index t = 0; t < space.mesh->num_triangles(); ++t)
    if (space.pressure_dof[t] >= 0) mp[space.pressure_dof[t]] = space.mesh->signed_area(t);
  return mp;
}

AssembledBlocks assemble_blocks(const CoupledSpace& space, const MaterialParams& params) {
  return {assemble_a(space, params), assemble_b(space), assemble_d(space), assemble_mp(space)};
}

krylov::LinearOperator dq_operator(const CsrMatrix& b, std::span<const double> mp) {
  if (static_cast<Index>(mp.size()) != b.rows()) throw Error("dq_operator: Mp size does not match B");
  std::vector<double> inv(mp.size());
  for (std::size_t i = 0; i < mp.size(); ++i) inv[i] = 1.0 / mp[i];
  return [&b, inv](std::span<const double> x, std::span<double> y) {
    std::vector<double> t(inv.size());
    b.multiply(x, t);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= inv[i];
    b.multiply_transpose(t, y);
  };
}

CsrMatrix assemble_dq(const CsrMatrix& b, std::span<const double> mp) {
  if (static_cast<Index>(mp.size()) != b.rows()) throw Error("assemble_dq: Mp size does not match B");
  std::vector<double> inv(mp.size());
  for (std::size_t i = 0; i < mp.size(); ++i) inv[i] = 1.0 / mp[i];
  return krylov::weighted_gram(b, inv);
}

std::vector<double> assemble_rhs(const CoupledSpace& space, const MaterialParams& p, const RhsInputs& in) {
  if (!(p.k > 0.0)) throw Error("assemble_rhs: time step must be positive");
  const Mesh& mesh = *space.mesh;
  const auto nv = static_cast<std::size_t>(space.num_velocity());
  if (!in.velocity.empty() && in.velocity.size() != nv) throw Error("assemble_rhs: velocity has the wrong size");
  if (!in.displacement.empty() && in.displacement.size() != nv)
    throw Error("assemble_rhs: displacement has the wrong size");
  if (!in.mesh_velocity.empty() && in.mesh_velocity.size() != static_cast<std::size_t>(mesh.num_nodes()))
    throw Error("assemble_rhs: mesh velocity has the wrong size");
  if (in.structure_stiffness &&
      (in.structure_stiffness->rows() != static_cast<Index>(nv) || in.structure_stiffness->cols() != static_cast<Index>(nv)))
    throw Error("assemble_rhs: structure stiffness has the wrong size");

  std::vector<double> f(nv, 0.0);
  ElementBasis eb;
  Local km;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const bool fluid = tri.tag == Subdomain::fluid;
    const auto& ep = space.element_points[t];
    element_basis(mesh, t, eb);

    double vloc[6][2] = {};
    if (!in.velocity.empty())
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c) vloc[i][c] = in.velocity[CoupledSpace::dof(ep[i], c)];
    Vec2 wloc[3] = {};
    if (fluid && !in.mesh_velocity.empty())
      for (int i = 0; i < 3; ++i) wloc[i] = in.mesh_velocity[tri.v[i]];

    const double rho = fluid ? p.rho_f : p.rho_s;
    const Vec2 g = fluid ? in.g_f : in.g_s;
    double floc[6][2] = {};
    for (int q = 0; q < kQ; ++q) {
      double v[2] = {0.0, 0.0}, dv[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // dv[c][d] = d_d v_c
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c) {
          v[c] += eb.n[q][i] * vloc[i][c];
          dv[c][0] += eb.gx[q][i] * vloc[i][c];
          dv[c][1] += eb.gy[q][i] * vloc[i][c];
        }
      double force[2] = {g.x + rho / p.k * v[0], g.y + rho / p.k * v[1]};
      if (fluid) {
        double w[2] = {0.0, 0.0};
        for (int i = 0; i < 3; ++i) {
          w[0] += eb.lambda[q][i] * wloc[i].x;
          w[1] += eb.lambda[q][i] * wloc[i].y;
        }
        const double rel[2] = {v[0] - w[0], v[1] - w[1]};
        for (int c = 0; c < 2; ++c) force[c] -= p.rho_f * (rel[0] * dv[c][0] + rel[1] * dv[c][1]);
      }
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c) floc[i][c] += eb.w[q] * eb.n[q][i] * force[c];
    }

    if (!fluid && !in.displacement.empty() && !in.structure_stiffness) {
      FormWeights fw;
      fw.strain = p.mu_s;
      fw.divdiv = p.lambda_s;
      local_matrix(eb, fw, km);
      double uloc[12];
      for (int j = 0; j < 12; ++j) uloc[j] = in.displacement[CoupledSpace::dof(ep[j / 2], j % 2)];
      for (int r = 0; r < 12; ++r) {
        double s = 0.0;
        for (int c = 0; c < 12; ++c) s += km[r][c] * uloc[c];
        floc[r / 2][r % 2] -= s;
      }
    }
    for (int i = 0; i < 6; ++i)
      for (int c = 0; c < 2; ++c) f[CoupledSpace::dof(ep[i], c)] += floc[i][c];
  }

  if (in.structure_stiffness && !in.displacement.empty()) {
    const auto ku = in.structure_stiffness->multiply(in.displacement);
    for (std::size_t i = 0; i < nv; ++i) f[i] -= ku[i];
  }
  return f;
}

}  // namespace fsi::femcore
