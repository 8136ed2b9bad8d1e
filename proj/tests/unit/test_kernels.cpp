#include "doctest.h"

#include "kinetic/collision.hpp"
#include "kinetic/dvm.hpp"
#include "kinetic/errors.hpp"
#include "kinetic/projections.hpp"
#include "kinetic/quadrature.hpp"
#include "kinetic/splitting.hpp"
#include "kinetic/velocity_grid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace kinetic;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

// E|v - Z| for Z standard normal in R^3, |v| = s, as a radial integral of the
// sphere average ((s + r)^3 - |s - r|^3) / (6 s r).
double mean_distance_oracle(double s) {
  auto integrand = [s](double r) {
    const double dens = 4.0 * kPi * r * r * std::pow(2.0 * kPi, -1.5) * std::exp(-0.5 * r * r);
    const double avg = s == 0.0 ? r : (std::pow(s + r, 3) - std::pow(std::abs(s - r), 3)) / (6.0 * s * r);
    return dens * avg;
  };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(integrand, 0.0, s, 12, 1e-14) +
         gauss_kronrod<double, 61>::integrate(integrand, s, 40.0, 12, 1e-14);
}

Eigen::VectorXd random_field(const VelocityGrid& g, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd f(g.size());
  for (int a = 0; a < g.size(); ++a) f[a] = u(gen) * g.mu()[a];
  return f;
}

struct Fixture {
  VelocityGrid grid{12, 6.0};
  CollisionModel model{CollisionParams{}};
  CollisionTable table{grid, model};
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("post-collision velocities") {
  auto [vp, vsp] = post_collision(Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0));
  CHECK((vp - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((vsp - Vec3(0, -1, 0)).norm() < 1e-15);

  const Vec3 v(0.3, -1.2, 2.0), vs(-0.7, 0.4, 1.1);
  std::tie(vp, vsp) = post_collision(v, vs, (v - vs).normalized());
  CHECK((vp - v).norm() < 1e-14);
  CHECK((vsp - vs).norm() < 1e-14);

  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  for (int i = 0; i < 500; ++i) {
    const Vec3 a(z(gen), z(gen), z(gen)), b(z(gen), z(gen), z(gen));
    const Vec3 s = Vec3(z(gen), z(gen), z(gen)).normalized();
    const auto [ap, bp] = post_collision(a, b, s);
    CHECK((ap + bp - a - b).norm() < 1e-12);
    CHECK(std::abs(ap.squaredNorm() + bp.squaredNorm() - a.squaredNorm() - b.squaredNorm()) < 1e-12);
  }
}

TEST_CASE("hard-sphere model constants") {
  const CollisionModel m{CollisionParams{}};
  CHECK(m.b_inf() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.l_b() == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  CollisionParams p;
  p.b_coefficients = {1.0, 0.0, 0.5};
  const CollisionModel q{p};
  // |S^1| int_0^pi (1 + cos^2 / 2) sin = 2 pi (2 + 1/3)
  CHECK(q.l_b() == doctest::Approx(2.0 * kPi * (2.0 + 1.0 / 3.0)).epsilon(1e-12));
  double b_max = 0.0;
  for (const Vec3& n : q.sphere().nodes) b_max = std::max(b_max, 1.0 + 0.5 * n[2] * n[2]);
  CHECK(std::abs(q.b_inf() - b_max) <= 1e-12);
}

TEST_CASE("collision frequency oracles") {
  CollisionParams maxwell;
  maxwell.gamma = 0.0;
  maxwell.c_phi = 2.0;
  const CollisionModel mm{maxwell};
  for (double s : {0.0, 1.0, 3.0, 7.5}) {
    CHECK(mm.nu_speed(s) == doctest::Approx(2.0 * 4.0 * kPi).epsilon(1e-10));
    CHECK(collision_frequency(mm, Vec3(s, 0, 0)).value == doctest::Approx(8.0 * kPi).epsilon(1e-8));
  }

  const CollisionModel hs{CollisionParams{}};
  // nu(0) = l_b E|Z| = 4 pi 2 sqrt(2 / pi)
  const double nu0 = 4.0 * kPi * 2.0 * std::sqrt(2.0 / kPi);
  CHECK(mean_distance_oracle(0.0) == doctest::Approx(2.0 * std::sqrt(2.0 / kPi)).epsilon(1e-12));
  CHECK(hs.nu_speed(0.0) == doctest::Approx(nu0).epsilon(1e-9));
  for (double s : {0.5, 2.0, 5.0, 8.0}) {
    const double ref = 4.0 * kPi * mean_distance_oracle(s);
    CHECK(hs.nu_speed(s) == doctest::Approx(ref).epsilon(1e-8));
    const NuEvaluation e = collision_frequency(hs, Vec3(0, s, 0));
    CHECK(e.value == doctest::Approx(ref).epsilon(1e-7));
    // the half-resolution disagreement bounds the actual error
    CHECK(std::abs(e.value - ref) <= e.richardson_error + 1e-12 * ref);
    if (s <= 5.0) CHECK_FALSE(e.under_resolved);
  }
  // nu(v) / |v| -> l_b
  CHECK(hs.nu_speed(8.0) / 8.0 == doctest::Approx(4.0 * kPi).epsilon(0.02));
}

TEST_CASE("nu bounds") {
  Fixture& fx = fixture();
  const NuBounds b = fit_nu_bounds(fx.grid, fx.table.nu(), 1.0);
  CHECK(b.nu0 > 0.0);
  for (int a = 0; a < fx.grid.size(); ++a) {
    const double s = 1.0 + fx.grid.node(a).norm();
    CHECK(b.nu0 * s <= fx.table.nu()[a] * (1.0 + 1e-12));
    CHECK(fx.table.nu()[a] <= b.nu1 * s * (1.0 + 1e-12));
  }
}

TEST_CASE("velocity grid") {
  const VelocityGrid g(12, 6.0);
  CHECK(g.maxwellian_mass() == doctest::Approx(1.0).epsilon(1e-6));
  for (int a = 0; a < g.size(); ++a) CHECK((g.node(g.negate(a)) + g.node(a)).norm() < 1e-14);
  std::vector<std::pair<int, double>> st;
  const Vec3 v(0.37, -1.91, 2.2);
  REQUIRE(g.conservative_stencil(v, st));
  double m0 = 0.0, e = 0.0;
  Vec3 m1 = Vec3::Zero();
  for (const auto& [a, w] : st) {
    m0 += w;
    m1 += w * g.node(a);
    e += w * g.node(a).squaredNorm();
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK((m1 - v).norm() < 1e-12);
  CHECK(e == doctest::Approx(v.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("lattice Q: equilibrium, bilinearity, symmetry") {
  Fixture& fx = fixture();
  const Eigen::VectorXd& mu = fx.grid.mu();
  CHECK(fx.table.q_bilinear(mu, mu).cwiseAbs().maxCoeff() <= 1e-14);
  std::mt19937_64 gen(2);
  const Eigen::VectorXd f = random_field(fx.grid, gen), g = random_field(fx.grid, gen);
  CHECK(fx.table.q_bilinear(f, Eigen::VectorXd::Zero(fx.grid.size())).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fx.table.q_bilinear(f, g) - fx.table.q_bilinear(g, f)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fx.table.linear_L(f) - 2.0 * fx.table.q_bilinear(mu, f)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((fx.table.linear_K(f) - fx.table.linear_L(f) - fx.table.nu().cwiseProduct(f))
            .cwiseAbs()
            .maxCoeff() <= 1e-13);
}

TEST_CASE("lattice Q: collision invariants and dissipation") {
  Fixture& fx = fixture();
  const Eigen::MatrixXd phi = collision_invariants(fx.grid);
  std::mt19937_64 gen(3);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd f = random_field(fx.grid, gen);
    const Eigen::VectorXd q = fx.table.q_bilinear(f, f);
    const double n2 = fx.grid.integrate(f.cwiseProduct(f));
    for (int j = 0; j < 5; ++j)
      CHECK(std::abs(fx.grid.integrate(q.cwiseProduct(phi.col(j)))) <= 1e-5 * n2);
    const Eigen::VectorXd lf = fx.table.linear_L(f);
    CHECK(fx.grid.integrate(lf.cwiseProduct(f).cwiseQuotient(fx.grid.mu())) <= 1e-8);
  }
  for (int j = 0; j < 5; ++j) {
    const Eigen::VectorXd k = phi.col(j).cwiseProduct(fx.grid.mu());
    CHECK(fx.table.linear_L(k).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("cutoff ramps") {
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(1.5) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  const double d = 0.1;
  // inner set: |v| = 5, |v - v*| = 1, |cos| = 0.5
  const Vec3 v(5, 0, 0), vs(4, 0, 0);
  const Vec3 sigma(0.5, std::sqrt(0.75), 0);
  CHECK(theta_cutoff(d, v, vs, sigma) == 1.0);
  CHECK(theta_cutoff(d, Vec3(30, 0, 0), Vec3(29, 0, 0), sigma) == 0.0);
  CHECK(theta_cutoff(d, v, Vec3(4.95, 0, 0), sigma) == 0.0);
  CHECK(theta_angle(d, 0.95) == 0.0);
  CHECK(theta_angle(d, 0.8) == 1.0);
  CHECK_THROWS_AS(theta_cutoff(1.5, v, vs, sigma), Error);
  for (double s = -1.0; s <= 2.0; s += 0.01) {
    CHECK(theta_speed(d, s * 20.0) >= 0.0);
    CHECK(theta_speed(d, s * 20.0) <= 1.0);
  }
}

TEST_CASE("closed-form constants") {
  const double g = 1.0, bi = 1.0, lb = 4.0 * kPi;
  CHECK(std::abs(kq_star(kInf, g, bi, lb) - 6.0) <= 1e-12);
  CHECK(std::abs(kq_star(1.0, g, bi, lb) - 2.0) <= 1e-12);
  CHECK(std::abs(kq_star(kInf, 0.0, bi, lb) - 5.0) <= 1e-12);
  CHECK(std::abs(phi_q(kInf, 10.0, g, bi, lb) - 0.5) <= 1e-12);
  CHECK(std::abs(phi_q(1.0, 10.0, g, bi, lb) - 1.0 / 3.0) <= 1e-12);
  const double near = phi_q(kInf, kq_star(kInf, g, bi, lb) + 1e-3, g, bi, lb);
  CHECK(near < 1.0);
  CHECK(near > 0.999);
  CHECK_THROWS_AS(phi_q(kInf, 2.0, g, bi, lb), MathDomainError);
  CHECK_THROWS_AS(kq_star(kInf, g, 0.1, lb), MathDomainError);
}

TEST_CASE("splitting exactness and support") {
  const VelocityGrid grid(8, 6.0);
  const CollisionModel model{CollisionParams{}};
  const CollisionTable table(grid, model);
  const Eigen::MatrixXd L = table.dense_L();
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> b2_norms;
  Eigen::VectorXd h(grid.size());
  for (int a = 0; a < grid.size(); ++a) h[a] = u(gen);
  for (double delta : {0.4, 0.2, 0.1, 0.05}) {
    const SplitOperator s(table, delta);
    const Eigen::VectorXd lhs = s.apply_A(h) + s.apply_B2(h) - s.nu().cwiseProduct(h);
    const Eigen::VectorXd rhs = L * h;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * rhs.cwiseAbs().maxCoeff());
    const Eigen::VectorXd ah = s.apply_A(h);
    for (int a = 0; a < grid.size(); ++a)
      if (grid.node(a).norm() > s.R_delta()) CHECK(ah[a] == 0.0);
    CHECK(s.measured_support_radius() <= s.R_delta());
    CHECK(s.apply_A(Eigen::VectorXd::Zero(grid.size())).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.apply_B2(Eigen::VectorXd::Zero(grid.size())).cwiseAbs().maxCoeff() == 0.0);
    b2_norms.push_back(s.apply_B2(h).cwiseAbs().sum());
  }
  for (std::size_t i = 1; i < b2_norms.size(); ++i) CHECK(b2_norms[i] <= b2_norms[i - 1]);
}

TEST_CASE("Delta estimates shrink along the delta ladder") {
  const VelocityGrid grid(8, 6.0);
  const CollisionModel model{CollisionParams{}};
  const CollisionTable table(grid, model);
  const Weight stretch = Weight::stretch_exp(0.1, 1.0);
  std::vector<double> ds, dt;
  for (double delta : {0.4, 0.2, 0.1, 0.05}) {
    const SplitOperator s(table, delta);
    ds.push_back(estimate_Delta(s, stretch, kInf).value);
    dt.push_back(estimate_Delta_tilde(s, 8.0).value);
  }
  for (std::size_t i = 1; i < ds.size(); ++i) {
    CHECK(ds[i] <= ds[i - 1]);
    CHECK(dt[i] <= dt[i - 1]);
  }
  ProbeFamily none;
  none.tails = none.bumps = none.row_signs = false;
  none.n_random = 0;
  CHECK_THROWS_AS(estimate_Delta(SplitOperator(table, 0.2), stretch, kInf, none), Error);
}

TEST_CASE("fluid projection") {
  const VelocityGrid g(12, 6.0);
  const Eigen::VectorXd& mu = g.mu();
  VelocitySplit s = project_piL(g, mu);
  CHECK((s.fluid - mu).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.micro.cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::VectorXd v1mu(g.size());
  for (int a = 0; a < g.size(); ++a) v1mu[a] = g.node(a)[0] * mu[a];
  CHECK((project_piL(g, v1mu).fluid - v1mu).cwiseAbs().maxCoeff() <= 1e-12);

  std::mt19937_64 gen(6);
  const Eigen::VectorXd f = random_field(g, gen);
  s = project_piL(g, f);
  CHECK((project_piL(g, s.fluid).fluid - s.fluid).cwiseAbs().maxCoeff() <= 1e-10);
  // orthogonalized by hand: the fluid part of the micro part vanishes
  CHECK(project_piL(g, s.micro).fluid.cwiseAbs().maxCoeff() <= 1e-12 * f.cwiseAbs().maxCoeff());
}

TEST_CASE("global projection") {
  auto vg = std::make_shared<const VelocityGrid>(8, 6.0);
  auto sg = std::make_shared<const SpatialGrid>(Domain::slab(), 6);
  Field mu(sg, vg);
  mu.fill([](const Vec3&, const Vec3& v) { return maxwellian(v); });
  for (BoundaryCondition bc : {BoundaryCondition::Specular, BoundaryCondition::Diffuse}) {
    const FieldSplit s = project_PiG(mu, bc);
    CHECK(s.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.orthogonal.values().cwiseAbs().maxCoeff() <= 1e-14);
  }
  Field f(sg, vg);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  f.fill([&](const Vec3&, const Vec3& v) { return u(gen) * maxwellian(v); });
  for (BoundaryCondition bc : {BoundaryCondition::Specular, BoundaryCondition::Diffuse}) {
    const FieldSplit s = project_PiG(f, bc);
    CHECK(std::abs(s.orthogonal.mass()) <= 1e-14);
    if (bc == BoundaryCondition::Specular) CHECK(std::abs(s.orthogonal.energy()) <= 1e-13);
    const FieldSplit again = project_PiG(s.conserved, bc);
    CHECK((again.conserved.values() - s.conserved.values()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(project_PiG(s.orthogonal, bc).conserved.values().cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("quadrature rules") {
  const Rule1D gl = gauss_legendre(10, 0.0, 2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) acc += gl.weights[i] * std::pow(gl.nodes[i], 7);
  CHECK(acc == doctest::Approx(32.0).epsilon(1e-13));
  const Rule1D gh = gauss_hermite_normal(12);
  acc = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) acc += gh.weights[i] * std::pow(gh.nodes[i], 4);
  CHECK(acc == doctest::Approx(3.0).epsilon(1e-12));
  const SphereQuadrature sq = SphereQuadrature::product(16, 16);
  double total = 0.0;
  for (double w : sq.weights) total += w;
  CHECK(total == doctest::Approx(4.0 * kPi).epsilon(1e-13));
}
