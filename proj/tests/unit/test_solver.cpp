#include "doctest.h"

#include "kinetic/errors.hpp"
#include "kinetic/solver.hpp"

#include <cmath>
#include <numbers>

using namespace kinetic;

namespace {

constexpr double kPi = std::numbers::pi;

SolverConfig small_config(BoundaryCondition bc = BoundaryCondition::Specular) {
  SolverConfig c;
  c.bc = bc;
  c.dt = 0.01;
  c.T = 0.2;
  return c;
}

KineticSystem make_system(const SolverConfig& cfg) {
  return KineticSystem(std::make_shared<const SpatialGrid>(Domain::slab(), 6),
                       std::make_shared<const VelocityGrid>(6, 5.0), CollisionParams{}, cfg);
}

Field perturbation(const KineticSystem& sys, double size) {
  Field f = sys.zeros();
  f.fill([](const Vec3& x, const Vec3& v) {
    // no mass, momentum or energy
    return maxwellian(v) * (v[0] * v[0] - v[1] * v[1]) * (1.0 + 0.5 * std::cos(2.0 * kPi * x[0]));
  });
  f.values() *= size / sup_weighted(f, sys.weight_samples());
  return f;
}

double sup_abs(const Trajectory& t) {
  double s = 0.0;
  for (const Field& f : t.fields) s = std::max(s, f.values().cwiseAbs().maxCoeff());
  return s;
}

}  // namespace

TEST_CASE("decay fit examples") {
  std::vector<std::pair<double, double>> a, b, c;
  const double nu0 = 20.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.05 * i;
    a.emplace_back(t, std::exp(-2.0 * t));
    b.emplace_back(t, 3.0);
    c.emplace_back(t, std::exp(-nu0 * t) * (1.0 + 0.01 * std::sin(t)));
  }
  const DecayFit fa = decay_fit(a);
  CHECK(fa.lambda_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fa.C_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(decay_fit(b).lambda_hat == 0.0);
  CHECK(std::abs(decay_fit(c).lambda_hat - nu0) <= 0.02);
  CHECK(decay_fit(a, 2.0).n_points == 61);

  std::vector<std::pair<double, double>> d{{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.0}, {3.0, 0.1}};
  const DecayFit fd = decay_fit(d);
  CHECK(fd.truncated);
  CHECK(fd.n_points == 2);
  CHECK_THROWS_AS(decay_fit({{0.0, 1.0}}), Error);
}

TEST_CASE("zero data stay zero") {
  const KineticSystem sys = make_system(small_config());
  const Field zero = sys.zeros();
  CHECK(sup_abs(solve_f1(sys, zero, nullptr).trajectory) == 0.0);
  CHECK(sup_abs(solve_f2(sys, sys.zero_trajectory()).trajectory) == 0.0);
  const CoupledResult r = solve_coupled(sys, zero);
  CHECK(sup_abs(r.f) == 0.0);
  CHECK(r.f.size() == 21);
}

TEST_CASE("f1 without B2 and Q is the damped transport semigroup") {
  SolverConfig cfg = small_config(BoundaryCondition::Diffuse);
  cfg.disable_B2 = true;
  cfg.disable_Q = true;
  const KineticSystem sys = make_system(cfg);
  const Field f0 = perturbation(sys, 5e-3);
  const F1Result r = solve_f1(sys, f0, nullptr);
  CHECK(r.iterations == 2);
  Field f = f0;
  for (int n = 1; n <= cfg.n_steps(); ++n) {
    Field s = f;
    s.values() -= cfg.dt * (f.values() * sys.nu().asDiagonal());
    f = sys.transport().apply(s);
    CHECK((r.trajectory.fields[n].values() - f.values()).cwiseAbs().maxCoeff() <=
          1e-15 * f0.values().cwiseAbs().maxCoeff());
  }
}

TEST_CASE("the global Maxwellian is a fixed point of the full scheme") {
  const KineticSystem sys = make_system(small_config());
  Field mu = sys.zeros();
  mu.fill([](const Vec3&, const Vec3& v) { return maxwellian(v); });
  const FullResult r = solve_full(sys, mu, FullForm::Full);
  CHECK_FALSE(r.negativity_flag);
  CHECK((r.trajectory.back().values() - mu.values()).cwiseAbs().maxCoeff() <=
        1e-13 * mu.values().maxCoeff());
}

TEST_CASE("full scheme conserves mass, and energy with specular walls") {
  for (BoundaryCondition bc : {BoundaryCondition::Specular, BoundaryCondition::Diffuse}) {
    const KineticSystem sys = make_system(small_config(bc));
    Field F = sys.zeros();
    F.fill([](const Vec3& x, const Vec3& v) {
      return maxwellian(v) * (1.0 + 0.2 * std::cos(2.0 * kPi * x[0]) * (1.0 + 0.3 * v[0] - 0.1 * v[1] * v[1]));
    });
    const FullResult r = solve_full(sys, F, FullForm::Full);
    const double m0 = F.mass(), e0 = F.energy();
    for (const Field& g : r.trajectory.fields) {
      CHECK(std::abs(g.mass() - m0) <= 1e-12 * m0);
      if (bc == BoundaryCondition::Specular) CHECK(std::abs(g.energy() - e0) <= 1e-12 * e0);
    }
  }
}

TEST_CASE("coupled solution solves the perturbation equation") {
  const KineticSystem sys = make_system(small_config());
  const Field f0 = perturbation(sys, 5e-3);
  const CoupledResult r = solve_coupled(sys, f0);
  CHECK(r.outer_iterations >= 1);
  CHECK(r.outer_iterations <= sys.config().max_outer_iters);
  for (std::size_t n = 0; n < r.f.size(); ++n)
    CHECK((r.f.fields[n].values() - r.f1.fields[n].values() - r.f2.fields[n].values())
              .cwiseAbs()
              .maxCoeff() <= 1e-15 * f0.values().cwiseAbs().maxCoeff());
  const double tol = sys.config().tol_fixed_point;
  CHECK(step_residual(sys, r.f) <= 10.0 * tol);
  CHECK(r.max_moment <= sys.config().tol_moment);

  const FullResult direct = solve_full(sys, f0, FullForm::Perturbation);
  CHECK(sup_weighted_distance(direct.trajectory, r.f, sys.weight_samples()) <=
        2.2 * tol * sup_weighted(r.f, sys.weight_samples()));
}

TEST_CASE("smallness guards") {
  const KineticSystem sys = make_system(small_config());
  const Field big = perturbation(sys, 2.0 * sys.config().eta0);
  CHECK_THROWS_AS(solve_coupled(sys, big), SolverError);
  CHECK_THROWS_AS(uniqueness_probe(sys, big, 10.0, 1), SolverError);
  CHECK_THROWS_AS(solve_f1(sys, perturbation(sys, 2.0 * sys.config().eta1), nullptr), SolverError);
}

TEST_CASE("configuration guards") {
  SolverConfig cfg = small_config();
  cfg.dt = 0.5;
  cfg.T = 1.0;
  CHECK_THROWS_AS(make_system(cfg), ConfigError);
  cfg = small_config();
  cfg.T = 0.205;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.delta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("uniqueness probe on a small datum") {
  const KineticSystem sys = make_system(small_config());
  const Field f0 = perturbation(sys, 2e-3);
  const UniquenessReport u = uniqueness_probe(sys, f0, 10.0, 7);
  CHECK(u.pass);
  CHECK(u.distance <= u.bound);
  CHECK(u.injected > 0.0);
}
