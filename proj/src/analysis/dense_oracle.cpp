#include "fsi/analysis/dense_oracle.hpp"

#include <cmath>

namespace fsi::analysis {

using meshkit::Subdomain;
using meshkit::Vec2;

Eigen::MatrixXd to_dense(const krylov::CsrMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) d(i, m.col_idx()[k]) += m.values()[k];
  return d;
}

namespace {

// Gauss-Legendre rule on [0, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (1.0 + es.eigenvalues()(i));
    const double v0 = es.eigenvectors()(0, i);
    w[i] = v0 * v0;  // 2 v0^2 on [-1, 1], halved for [0, 1]
  }
}

}  // namespace

DenseOracle::DenseOracle(const CoupledSpace& space, int n) : space_(space) {
  if (n < 1) throw Error("DenseOracle: need at least one Gauss point");
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);
  const auto& mesh = *space.mesh;
  elements_.resize(static_cast<std::size_t>(mesh.num_triangles()));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles()[t].v;
    const Vec2 p[3] = {mesh.nodes()[v[0]], mesh.nodes()[v[1]], mesh.nodes()[v[2]]};
    // Barycentric coordinates lambda_i(x, y) = c(0,i) + c(1,i) x + c(2,i) y.
    Eigen::Matrix3d vm;
    for (int i = 0; i < 3; ++i) vm.row(i) << 1.0, p[i].x, p[i].y;
    const Eigen::Matrix3d c = vm.inverse();
    const double area = 0.5 * vm.determinant();
    auto& el = elements_[t];
    el.area = area;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // Collapsed map (s, u) -> (xi, eta) = (s, u (1 - s)) with Jacobian 1 - s.
        const double xi = gx[i], eta = gx[j] * (1.0 - gx[i]);
        Sample s;
        s.w = 2.0 * area * gw[i] * gw[j] * (1.0 - gx[i]);
        s.x = p[0].x + xi * (p[1].x - p[0].x) + eta * (p[2].x - p[0].x);
        s.y = p[0].y + xi * (p[1].y - p[0].y) + eta * (p[2].y - p[0].y);
        double l[3], dl[3][2];
        for (int k = 0; k < 3; ++k) {
          l[k] = c(0, k) + c(1, k) * s.x + c(2, k) * s.y;
          dl[k][0] = c(1, k);
          dl[k][1] = c(2, k);
        }
        for (int k = 0; k < 3; ++k) {
          s.phi[k] = l[k] * (2.0 * l[k] - 1.0);
          for (int d = 0; d < 2; ++d) s.dphi[k][d] = (4.0 * l[k] - 1.0) * dl[k][d];
          const int a = (k + 1) % 3, b = (k + 2) % 3;  // midpoint opposite vertex k
          s.phi[3 + k] = 4.0 * l[a] * l[b];
          for (int d = 0; d < 2; ++d) s.dphi[3 + k][d] = 4.0 * (l[a] * dl[b][d] + l[b] * dl[a][d]);
        }
        el.samples.push_back(s);
      }
  }
}

Eigen::MatrixXd DenseOracle::a(const MaterialParams& p) const {
  const Index n = space_.num_velocity();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const auto& mesh = *space_.mesh;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const bool fluid = mesh.triangles()[t].tag == Subdomain::fluid;
    const double cm = fluid ? p.rho_f / p.k : p.rho_s / p.k;
    const double ce = fluid ? p.mu_f : p.k * p.mu_s;
    const double cd = fluid ? 0.0 : p.k * p.lambda_s;
    const auto& ep = space_.element_points[t];
    for (const auto& s : elements_[t].samples)
      for (int i = 0; i < 6; ++i)
        for (int a = 0; a < 2; ++a)
          for (int j = 0; j < 6; ++j)
            for (int b = 0; b < 2; ++b) {
              // Symmetric gradients of the two vector basis functions.
              double ei[2][2] = {}, ej[2][2] = {};
              for (int d = 0; d < 2; ++d) {
                ei[a][d] += 0.5 * s.dphi[i][d];
                ei[d][a] += 0.5 * s.dphi[i][d];
                ej[b][d] += 0.5 * s.dphi[j][d];
                ej[d][b] += 0.5 * s.dphi[j][d];
              }
              double ee = 0.0;
              for (int r = 0; r < 2; ++r)
                for (int q = 0; q < 2; ++q) ee += ei[r][q] * ej[r][q];
              const double v = cm * (a == b) * s.phi[i] * s.phi[j] + ce * ee + cd * s.dphi[i][a] * s.dphi[j][b];
              m(2 * ep[i] + a, 2 * ep[j] + b) += s.w * v;
            }
  }
  return m;
}

Eigen::MatrixXd DenseOracle::b() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(space_.num_pressure, space_.num_velocity());
  for (Index t = 0; t < space_.mesh->num_triangles(); ++t) {
    const Index row = space_.pressure_dof[t];
    if (row < 0) continue;
    const auto& ep = space_.element_points[t];
    for (const auto& s : elements_[t].samples)
      for (int i = 0; i < 6; ++i)
        for (int a = 0; a < 2; ++a) m(row, 2 * ep[i] + a) += s.w * s.dphi[i][a];
  }
  return m;
}

Eigen::MatrixXd DenseOracle::d() const {
  const Index n = space_.num_velocity();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index t = 0; t < space_.mesh->num_triangles(); ++t) {
    if (space_.pressure_dof[t] < 0) continue;
    const auto& ep = space_.element_points[t];
    for (const auto& s : elements_[t].samples)
      for (int i = 0; i < 6; ++i)
        for (int a = 0; a < 2; ++a)
          for (int j = 0; j < 6; ++j)
            for (int b = 0; b < 2; ++b) m(2 * ep[i] + a, 2 * ep[j] + b) += s.w * s.dphi[i][a] * s.dphi[j][b];
  }
  return m;
}

Eigen::VectorXd DenseOracle::mp() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(space_.num_pressure);
  for (Index t = 0; t < space_.mesh->num_triangles(); ++t) {
    if (space_.pressure_dof[t] < 0) continue;
    for (const auto& s : elements_[t].samples) m(space_.pressure_dof[t]) += s.w;
  }
  return m;
}

Eigen::MatrixXd DenseOracle::h1() const {
  const Index n = space_.num_velocity();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index t = 0; t < space_.mesh->num_triangles(); ++t) {
    const auto& ep = space_.element_points[t];
    for (const auto& s : elements_[t].samples)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          const double v = s.phi[i] * s.phi[j] + s.dphi[i][0] * s.dphi[j][0] + s.dphi[i][1] * s.dphi[j][1];
          for (int a = 0; a < 2; ++a) m(2 * ep[i] + a, 2 * ep[j] + a) += s.w * v;
        }
  }
  return m;
}

Eigen::MatrixXd DenseOracle::dq() const {
  const Eigen::MatrixXd bm = b();
  const Eigen::VectorXd m = mp();
  return bm.transpose() * m.cwiseInverse().asDiagonal() * bm;
}

void DenseOracle::field_at(int t, const Sample& s, const Eigen::VectorXd& u, double val[2], double grad[2][2]) const {
  const auto& ep = space_.element_points[t];
  for (int c = 0; c < 2; ++c) {
    val[c] = 0.0;
    grad[c][0] = grad[c][1] = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double ui = u(2 * ep[i] + c);
      val[c] += s.phi[i] * ui;
      grad[c][0] += s.dphi[i][0] * ui;
      grad[c][1] += s.dphi[i][1] * ui;
    }
  }
}

Eigen::VectorXd DenseOracle::rhs(const MaterialParams& p, const femcore::RhsInputs& in) const {
  const Index n = space_.num_velocity();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n), disp = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < in.velocity.size(); ++i) v(static_cast<Index>(i)) = in.velocity[i];
  for (std::size_t i = 0; i < in.displacement.size(); ++i) disp(static_cast<Index>(i)) = in.displacement[i];
  const auto& mesh = *space_.mesh;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const bool fluid = tri.tag == Subdomain::fluid;
    const auto& ep = space_.element_points[t];
    // Mesh velocity is linear: interpolate through barycentrics of the vertices.
    Eigen::Matrix3d vm;
    for (int i = 0; i < 3; ++i) vm.row(i) << 1.0, mesh.nodes()[tri.v[i]].x, mesh.nodes()[tri.v[i]].y;
    const Eigen::Matrix3d c = vm.inverse();
    for (const auto& s : elements_[t].samples) {
      double val[2], grad[2][2], uval[2], ugrad[2][2];
      field_at(t, s, v, val, grad);
      field_at(t, s, disp, uval, ugrad);
      const double rho = fluid ? p.rho_f : p.rho_s;
      const Vec2 g = fluid ? in.g_f : in.g_s;
      double force[2] = {g.x + rho / p.k * val[0], g.y + rho / p.k * val[1]};
      double stress[2][2] = {{0, 0}, {0, 0}};
      if (fluid) {
        double w[2] = {0.0, 0.0};
        if (!in.mesh_velocity.empty())
          for (int k = 0; k < 3; ++k) {
            const double lk = c(0, k) + c(1, k) * s.x + c(2, k) * s.y;
            w[0] += lk * in.mesh_velocity[tri.v[k]].x;
            w[1] += lk * in.mesh_velocity[tri.v[k]].y;
          }
        for (int a = 0; a < 2; ++a)
          force[a] -= p.rho_f * ((val[0] - w[0]) * grad[a][0] + (val[1] - w[1]) * grad[a][1]);
      } else {
        const double div = ugrad[0][0] + ugrad[1][1];
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            stress[a][b] = p.mu_s * 0.5 * (ugrad[a][b] + ugrad[b][a]) + (a == b ? p.lambda_s * div : 0.0);
      }
      for (int i = 0; i < 6; ++i)
        for (int a = 0; a < 2; ++a) {
          // stress : grad(phi_i e_a) = sum_d stress[a][d] d_d phi_i (stress symmetric)
          const double sg = stress[a][0] * s.dphi[i][0] + stress[a][1] * s.dphi[i][1];
          f(2 * ep[i] + a) += s.w * (force[a] * s.phi[i] - sg);
        }
    }
  }
  return f;
}

double DenseOracle::element_a(int t, const Eigen::VectorXd& u, const MaterialParams& p, double* div_sq,
                              double* div_int) const {
  const bool fluid = space_.mesh->triangles()[t].tag == Subdomain::fluid;
  const double cm = fluid ? p.rho_f / p.k : p.rho_s / p.k;
  const double ce = fluid ? p.mu_f : p.k * p.mu_s;
  const double cd = fluid ? 0.0 : p.k * p.lambda_s;
  double a = 0.0, dsq = 0.0, dint = 0.0;
  for (const auto& s : elements_[t].samples) {
    double val[2], g[2][2];
    field_at(t, s, u, val, g);
    const double div = g[0][0] + g[1][1];
    const double off = 0.5 * (g[0][1] + g[1][0]);
    const double ee = g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * off * off;
    a += s.w * (cm * (val[0] * val[0] + val[1] * val[1]) + ce * ee + cd * div * div);
    dsq += s.w * div * div;
    dint += s.w * div;
  }
  *div_sq = fluid ? dsq : 0.0;
  *div_int = fluid ? dint : 0.0;
  return a;
}

double DenseOracle::a_form(const Eigen::VectorXd& u, const MaterialParams& p) const {
  double s = 0.0, dsq, dint;
  for (Index t = 0; t < space_.mesh->num_triangles(); ++t) s += element_a(t, u, p, &dsq, &dint);
  return s;
}

double DenseOracle::v_norm_sq(const Eigen::VectorXd& u, const MaterialParams& p, double r) const {
  double s = 0.0, dsq, dint;
  for (Index t = 0; t < space_.mesh->num_triangles(); ++t) {
    s += element_a(t, u, p, &dsq, &dint);
    s += r * dsq;
  }
  return s;
}

double DenseOracle::vq_norm_sq(const Eigen::VectorXd& u, const MaterialParams& p, double r) const {
  double s = 0.0, dsq, dint;
  for (Index t = 0; t < space_.mesh->num_triangles(); ++t) {
    s += element_a(t, u, p, &dsq, &dint);
    if (space_.pressure_dof[t] >= 0) s += r * dint * dint / elements_[t].area;
  }
  return s;
}

}  // namespace fsi::analysis
