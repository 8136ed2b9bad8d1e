#include "kinetic/projections.hpp"

#include "kinetic/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace kinetic {

BoundaryCondition parse_boundary_condition(const std::string& tag) {
  if (tag == "specular") return BoundaryCondition::Specular;
  if (tag == "diffuse") return BoundaryCondition::Diffuse;
  throw ConfigError("bc", "unknown boundary condition '" + tag + "'");
}

const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Specular ? "specular" : "diffuse";
}

Eigen::MatrixXd collision_invariants(const VelocityGrid& grid) {
  Eigen::MatrixXd phi(grid.size(), 5);
  for (int a = 0; a < grid.size(); ++a) {
    const Vec3& v = grid.node(a);
    phi(a, 0) = 1.0;
    phi(a, 1) = v[0];
    phi(a, 2) = v[1];
    phi(a, 3) = v[2];
    phi(a, 4) = (v.squaredNorm() - 3.0) / std::sqrt(6.0);
  }
  return phi;
}

VelocitySplit project_piL(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f) {
  if (f.size() != grid.size()) throw Error("velocity function size does not match grid");
  const Eigen::MatrixXd phi = collision_invariants(grid);
  const Eigen::MatrixXd basis = grid.mu().asDiagonal() * phi;  // phi_i mu
  const Eigen::MatrixXd gram = grid.weight() * phi.transpose() * basis;
  const Eigen::VectorXd rhs = grid.weight() * phi.transpose() * f;
  const Eigen::VectorXd c = gram.ldlt().solve(rhs);
  VelocitySplit out;
  out.fluid = basis * c;
  out.micro = f - out.fluid;
  return out;
}

FieldSplit project_PiG(const Field& f, BoundaryCondition bc) {
  const VelocityGrid& vg = f.velocity();
  const int nb = bc == BoundaryCondition::Specular ? 2 : 1;
  Eigen::MatrixXd psi(vg.size(), nb);
  for (int a = 0; a < vg.size(); ++a) {
    psi(a, 0) = 1.0;
    if (nb == 2) psi(a, 1) = vg.node(a).squaredNorm();
  }
  const double vol = f.space().cell_volume() * f.n_cells();
  const Eigen::MatrixXd basis = vg.mu().asDiagonal() * psi;
  const Eigen::MatrixXd gram = vol * vg.weight() * psi.transpose() * basis;
  // phase-space moments of f against psi
  const Eigen::VectorXd col_sums = f.values().colwise().sum().transpose();
  const Eigen::VectorXd rhs = f.space().cell_volume() * vg.weight() * psi.transpose() * col_sums;
  const Eigen::VectorXd c = gram.ldlt().solve(rhs);
  const Eigen::VectorXd profile = basis * c;
  FieldSplit out{f.zeros_like(), f.zeros_like(), c};
  out.conserved.values().rowwise() = profile.transpose();
  out.orthogonal.values() = f.values() - out.conserved.values();
  return out;
}

}  // namespace kinetic
