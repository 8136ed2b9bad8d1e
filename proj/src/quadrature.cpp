#include "kinetic/quadrature.hpp"

#include "kinetic/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace kinetic {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix, weights
// mu0 times the squared first eigenvector components.
Rule1D golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) jac(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) jac(i, i + 1) = jac(i + 1, i) = offdiag[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error("quadrature order must be positive");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n), e(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) e[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Rule1D r = golub_welsch(d, e, 2.0);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = 0.5 * (b - a) * r.nodes[i] + 0.5 * (a + b);
    r.weights[i] *= 0.5 * (b - a);
  }
  return r;
}

Rule1D gauss_hermite_normal(int n) {
  if (n < 1) throw Error("quadrature order must be positive");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n), e(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(d, e, 1.0);
}

Rule1D gauss_laguerre(int n) {
  if (n < 1) throw Error("quadrature order must be positive");
  Eigen::VectorXd d(n), e(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) d[k] = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) e[k - 1] = k;
  return golub_welsch(d, e, 1.0);
}

SphereQuadrature SphereQuadrature::product(int n_polar, int n_azimuth) {
  if (n_polar < 1 || n_azimuth < 1) throw Error("sphere quadrature sizes must be positive");
  const Rule1D gl = gauss_legendre(n_polar);
  SphereQuadrature q;
  const double dphi = 2.0 * std::numbers::pi / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_azimuth; ++j) {
      const double phi = (j + 0.5) * dphi;
      q.nodes.emplace_back(s * std::cos(phi), s * std::sin(phi), c);
      q.weights.push_back(gl.weights[i] * dphi);
    }
  }
  return q;
}

}  // namespace kinetic
