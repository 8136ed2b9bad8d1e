#include "kinetic/collision.hpp"

#include "kinetic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace kinetic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTableMax = 24.0;
constexpr int kTableSize = 2401;

// int |w|^gamma mu(v - w) dw in spherical coordinates about v with the polar
// axis along v; n_r radial Gauss-Legendre nodes on [0, |v| + 12], n_c polar
// nodes. The azimuthal integral is exact because the integrand is axisymmetric.
const Rule1D& cached_rule(int n) {
  static std::mutex lock;
  static std::map<int, Rule1D> rules;
  std::lock_guard<std::mutex> guard(lock);
  auto it = rules.find(n);
  if (it == rules.end()) it = rules.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

double shifted_moment(double speed, double gamma, int n_r, int n_c) {
  const Rule1D& radial = cached_rule(n_r);
  const Rule1D& polar = cached_rule(n_c);
  const double r_half = 0.5 * (speed + 12.0);
  double total = 0.0;
  for (int i = 0; i < n_r; ++i) {
    const double s = r_half * (1.0 + radial.nodes[i]);
    // split the polar integral near c = 1 where the integrand peaks
    const double knee = std::clamp(1.0 - 4.0 / (1.0 + s * speed), -1.0, 1.0);
    double ang = 0.0;
    for (const auto& [a, b] : {std::pair{-1.0, knee}, std::pair{knee, 1.0}}) {
      if (b <= a) continue;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int j = 0; j < n_c; ++j) {
        const double c = mid + half * polar.nodes[j];
        ang += half * polar.weights[j] * maxwellian(speed * speed + s * s - 2.0 * s * speed * c);
      }
    }
    total += r_half * radial.weights[i] * std::pow(s, gamma + 2.0) * 2.0 * kPi * ang;
  }
  return total;
}

}  // namespace

AngularKernel::AngularKernel(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.empty()) throw Error("angular kernel needs at least one coefficient");
}

double AngularKernel::operator()(double c) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * c + *it;
  return acc;
}

CollisionModel::CollisionModel(const CollisionParams& params)
    : params_(params),
      gamma_(params.gamma),
      c_phi_(params.c_phi),
      b_(params.b_coefficients),
      sphere_(SphereQuadrature::product(params.sphere_polar, params.sphere_azimuth)) {
  if (gamma_ < 0.0 || gamma_ > 1.0) throw Error("gamma must lie in [0, 1]");
  if (!(c_phi_ > 0.0)) throw Error("C_phi must be positive");
  for (std::size_t q = 0; q < sphere_.size(); ++q) {
    const double bv = b_(sphere_.nodes[q][2]);
    if (bv < 0.0) throw Error("angular kernel b must be nonnegative");
    b_inf_ = std::max(b_inf_, bv);
    l_b_ += sphere_.weights[q] * bv;
  }
  table_dr_ = kTableMax / (kTableSize - 1);
  nu_table_.resize(kTableSize);
  for (int i = 0; i < kTableSize; ++i) {
    nu_table_[i] = c_phi_ * l_b_ * shifted_moment(i * table_dr_, gamma_, 96, 48);
  }
}

double CollisionModel::phi(double z) const {
  return gamma_ == 0.0 ? c_phi_ : c_phi_ * std::pow(z, gamma_);
}

double CollisionModel::nu_speed(double speed) const {
  if (speed >= kTableMax) return c_phi_ * l_b_ * shifted_moment(speed, gamma_, 96, 48);
  const double s = speed / table_dr_;
  const int i = std::min(static_cast<int>(s), kTableSize - 4);
  // cubic Lagrange through four neighbouring table points
  const int i0 = std::max(i - 1, 0);
  const double x = s - i0;
  const double y0 = nu_table_[i0], y1 = nu_table_[i0 + 1], y2 = nu_table_[i0 + 2],
               y3 = nu_table_[i0 + 3];
  return y0 * (x - 1) * (x - 2) * (x - 3) / -6.0 + y1 * x * (x - 2) * (x - 3) / 2.0 +
         y2 * x * (x - 1) * (x - 3) / -2.0 + y3 * x * (x - 1) * (x - 2) / 6.0;
}

std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& sigma) {
  const Vec3 centre = 0.5 * (v + v_star);
  const double half = 0.5 * (v - v_star).norm();
  return {centre + half * sigma, centre - half * sigma};
}

NuEvaluation collision_frequency(const CollisionModel& model, const Vec3& v, double tol) {
  const double speed = v.norm();
  const double fine = shifted_moment(speed, model.gamma(), 96, 48);
  const double coarse = shifted_moment(speed, model.gamma(), 48, 24);
  const double scale = model.c_phi() * model.l_b();
  const double err = scale * std::abs(fine - coarse);
  return {scale * fine, err, err > tol * std::max(1.0, scale * fine)};
}

NuBounds fit_nu_bounds(const VelocityGrid& grid, const Eigen::VectorXd& nu, double gamma) {
  NuBounds out{nu.minCoeff(), std::numeric_limits<double>::infinity(), 0.0};
  for (int a = 0; a < grid.size(); ++a) {
    const double r = nu[a] / (1.0 + std::pow(grid.node(a).norm(), gamma));
    out.nu0 = std::min(out.nu0, r);
    out.nu1 = std::max(out.nu1, r);
  }
  return out;
}

}  // namespace kinetic
