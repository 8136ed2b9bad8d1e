#pragma once

#include "kinetic/geometry.hpp"

#include <vector>

namespace kinetic {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre on [a, b].
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);
/// Gauss-Hermite for the standard normal density: sum w_i g(x_i) ~ E[g(Z)].
Rule1D gauss_hermite_normal(int n);
/// Gauss-Laguerre for the weight e^{-x} on (0, inf).
Rule1D gauss_laguerre(int n);

/// Product rule on S^2: Gauss-Legendre in cos(theta) times a uniform
/// trapezoid in azimuth. Weights sum to 4 pi.
struct SphereQuadrature {
  std::vector<Vec3> nodes;
  std::vector<double> weights;

  static SphereQuadrature product(int n_polar, int n_azimuth);
  std::size_t size() const { return nodes.size(); }
};

}  // namespace kinetic
