#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fsi/femcore/assembly.hpp"
#include "fsi/femcore/space.hpp"
#include "fsi/krylov/sparse_matrix.hpp"

namespace fsi::analysis {

using femcore::CoupledSpace;
using femcore::MaterialParams;

Eigen::MatrixXd to_dense(const krylov::CsrMatrix& m);

/// Dense reference assembly used to cross-check femcore.
///
/// Shape functions are built from barycentric coordinates in physical
/// space and integrated with a collapsed (Duffy) Gauss-Legendre product
/// rule, so no code path is shared with the sparse assembly beyond the DOF
/// maps of the space.
class DenseOracle {
 public:
  /// `points_per_direction` Gauss points per collapsed direction; the rule
  /// is exact to degree 2n - 2 on triangles.
  explicit DenseOracle(const CoupledSpace& space, int points_per_direction = 5);

  Eigen::MatrixXd a(const MaterialParams& p) const;
  Eigen::MatrixXd b() const;
  Eigen::MatrixXd d() const;
  Eigen::VectorXd mp() const;
  Eigen::MatrixXd h1() const;
  Eigen::MatrixXd dq() const;
  Eigen::VectorXd rhs(const MaterialParams& p, const femcore::RhsInputs& in) const;

  /// a(u, u) integrated from the field u.
  double a_form(const Eigen::VectorXd& u, const MaterialParams& p) const;
  /// ||u||_V^2 = a(u, u) + r ||div u_f||^2.
  double v_norm_sq(const Eigen::VectorXd& u, const MaterialParams& p, double r) const;
  /// a(u, u) + r ||P_0 div u_f||^2 with P_0 the elementwise mean.
  double vq_norm_sq(const Eigen::VectorXd& u, const MaterialParams& p, double r) const;

 private:
  struct Sample {
    double w;
    double x, y;
    double phi[6];
    double dphi[6][2];
  };
  struct Element {
    std::vector<Sample> samples;
    double area;
  };

  void field_at(int t, const Sample& s, const Eigen::VectorXd& u, double val[2], double grad[2][2]) const;
  double element_a(int t, const Eigen::VectorXd& u, const MaterialParams& p, double* div_sq, double* div_int) const;

  const CoupledSpace& space_;
  std::vector<Element> elements_;
};

}  // namespace fsi::analysis
