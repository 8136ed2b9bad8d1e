#include "doctest.h"

#include "kinetic/errors.hpp"
#include "kinetic/geometry.hpp"
#include "kinetic/rng.hpp"

#include <cmath>
#include <random>

using namespace kinetic;

namespace {

Vec3 random_unit(std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Vec3 v(z(gen), z(gen), z(gen));
  return v / v.norm();
}

Vec3 random_inside(const Domain& d, std::mt19937_64& gen) {
  const auto [lo, hi] = d.bounding_box();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Vec3 x;
    for (int i = 0; i < 3; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(gen);
    if (d.xi(x).value < -1e-3) return x;
  }
}

// 1D unfolding of the slab: position and sign of v1 after backward flight.
std::pair<double, double> unfold(double x, double v1, double t) {
  double y = std::fmod(x - t * v1, 2.0);
  if (y < 0.0) y += 2.0;
  if (y <= 1.0) return {y, v1};
  return {2.0 - y, -v1};
}

}  // namespace

TEST_CASE("outward normals") {
  const Domain ball = Domain::ball(Vec3::Zero(), 1.0);
  CHECK((outward_normal(ball, Vec3(1, 0, 0)) - Vec3(1, 0, 0)).norm() < 1e-12);
  const Domain slab = Domain::slab();
  CHECK((outward_normal(slab, Vec3(0, 0.3, 0.7)) - Vec3(-1, 0, 0)).norm() < 1e-12);
  const Domain ell = Domain::ellipsoid(Vec3::Zero(), Vec3(2, 1, 1));
  CHECK((outward_normal(ell, Vec3(2, 0, 0)) - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK_THROWS_AS(outward_normal(ball, Vec3(0.5, 0, 0)), GeometryError);
}

TEST_CASE("specular reflection examples") {
  CHECK((specular_reflect(Vec3(1, 0, 0), Vec3(1, 2, 3)) - Vec3(-1, 2, 3)).norm() < 1e-15);
  CHECK((specular_reflect(Vec3(0, 0, 1), Vec3(0, 0, -5)) - Vec3(0, 0, 5)).norm() < 1e-15);
  const Vec3 n = Vec3(1, 1, 0) / std::sqrt(2.0);
  CHECK((specular_reflect(n, Vec3(1, 0, 0)) - Vec3(0, -1, 0)).norm() < 1e-15);
}

TEST_CASE("reflection is a speed-preserving involution") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 n = random_unit(gen);
    const Vec3 v(z(gen), z(gen), z(gen));
    const Vec3 r = specular_reflect(n, v);
    CHECK(std::abs(r.norm() - v.norm()) < 1e-12);
    CHECK((specular_reflect(n, r) - v).norm() < 1e-12);
  }
}

TEST_CASE("backward exit time examples") {
  const Domain ball = Domain::ball(Vec3::Zero(), 1.0);
  ExitResult e = backward_exit_time(ball, Vec3::Zero(), Vec3(2, 0, 0));
  CHECK(e.t_b == doctest::Approx(0.5).epsilon(1e-14));
  CHECK((e.x_b - Vec3(-1, 0, 0)).norm() < 1e-12);

  e = backward_exit_time(Domain::slab(), Vec3(0.3, 0, 0), Vec3(-1, 0, 0));
  CHECK(e.t_b == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(std::abs(e.x_b[0] - 1.0) < 1e-12);

  // |x - t v|^2 = 1 with x = (0.5, 0, 0), v = (1, 1, 0): 2t^2 - t - 0.75 = 0
  e = backward_exit_time(ball, Vec3(0.5, 0, 0), Vec3(1, 1, 0));
  const double root = (1.0 + std::sqrt(1.0 + 6.0)) / 4.0;
  CHECK(std::abs(e.t_b - root) < 1e-12);
  CHECK(std::abs(backward_exit_time_bisection(ball, Vec3(0.5, 0, 0), Vec3(1, 1, 0)) - root) < 1e-10);

  CHECK_THROWS_AS(backward_exit_time(ball, Vec3::Zero(), Vec3::Zero()), GeometryError);
  CHECK(std::isinf(backward_exit_time(Domain::slab(), Vec3(0.5, 0, 0), Vec3(0, 1, 0)).t_b));
}

TEST_CASE("quadratic exit time agrees with bisection") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> z;
  const Domain domains[] = {Domain::ball(Vec3(0.1, -0.2, 0.3), 1.3),
                            Domain::ellipsoid(Vec3::Zero(), Vec3(2.0, 1.0, 0.5))};
  for (const Domain& d : domains) {
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x = random_inside(d, gen);
      const Vec3 v(z(gen), z(gen), z(gen));
      const ExitResult e = backward_exit_time(d, x, v);
      CHECK(std::abs(e.t_b - backward_exit_time_bisection(d, x, v)) < 1e-10);
      CHECK(std::abs(d.xi(e.x_b).value) <= kTolBoundary);
    }
  }
}

TEST_CASE("phase point classification") {
  const Domain ball = Domain::ball(Vec3::Zero(), 1.0);
  auto cls = [&](const Vec3& x, const Vec3& v) {
    return std::get<BoundaryPhasePoint>(classify_phase_point(ball, x, v)).cls;
  };
  CHECK(cls(Vec3(1, 0, 0), Vec3(1, 0, 0)) == BoundaryClass::Outgoing);
  CHECK(cls(Vec3(1, 0, 0), Vec3(-1, 0, 0)) == BoundaryClass::Incoming);
  CHECK(cls(Vec3(1, 0, 0), Vec3(0, 1, 0)) == BoundaryClass::Grazing);
  CHECK(std::holds_alternative<Interior>(classify_phase_point(ball, Vec3::Zero(), Vec3(3, 1, 2))));
  CHECK_THROWS_AS(classify_phase_point(ball, Vec3(2, 0, 0), Vec3(1, 0, 0)), GeometryError);
}

TEST_CASE("specular trace without rebound") {
  const Domain ball = Domain::ball(Vec3::Zero(), 1.0);
  const Vec3 x(0.2, 0.1, 0), v(0.5, 0, 0);
  const ReboundChain c = trace_specular(ball, 0.5, x, v);
  REQUIRE(c.reached_initial_plane());
  CHECK(c.rebounds() == 0);
  const auto& end = std::get<ReachedInitialPlane>(c.terminal);
  CHECK((end.x - (x - 0.5 * v)).norm() < 1e-14);
  CHECK((end.v - v).norm() == 0.0);
}

TEST_CASE("slab trace matches the unfolding oracle") {
  const Domain slab = Domain::slab();
  const ReboundChain c = trace_specular(slab, 2.0, Vec3(0.5, 0, 0), Vec3(1, 0, 0));
  REQUIRE(c.rebounds() == 2);
  CHECK(std::abs(c.hits[0].x[0]) < 1e-12);
  CHECK(std::abs(c.hits[1].x[0] - 1.0) < 1e-12);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0), w(-3.0, 3.0), tt(0.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 x(u(gen), u(gen), u(gen)), v(w(gen), w(gen), w(gen));
    const double t = tt(gen);
    const ReboundChain ch = trace_specular(slab, t, x, v);
    const auto& end = std::get<ReachedInitialPlane>(ch.terminal);
    const auto [X, V1] = unfold(x[0], v[0], t);
    CHECK(std::abs(end.x[0] - X) < 1e-10);
    CHECK(end.v[0] == doctest::Approx(V1).epsilon(1e-14));
    CHECK(end.v[1] == v[1]);
  }
}

TEST_CASE("diameter chord bounces with preserved speed") {
  const Domain ball = Domain::ball(Vec3::Zero(), 1.0);
  const ReboundChain c = trace_specular(ball, 10.0, Vec3::Zero(), Vec3(1, 0, 0));
  CHECK(c.rebounds() == 5);
  for (const auto& h : c.hits) {
    CHECK(std::abs(std::abs(h.x[0]) - 1.0) < 1e-10);
    CHECK(std::abs(h.v.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("chain invariants and time additivity") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  const Domain d = Domain::ellipsoid(Vec3(0.5, 0, 0), Vec3(1.5, 1.0, 0.8));
  for (int i = 0; i < 300; ++i) {
    const Vec3 x = random_inside(d, gen);
    const Vec3 v(z(gen), z(gen), z(gen));
    const ReboundChain c = trace_specular(d, 3.0, x, v);
    double prev = 3.0;
    for (const auto& h : c.hits) {
      CHECK(std::abs(d.xi(h.x).value) <= kTolBoundary);
      CHECK(std::abs(h.v.norm() - v.norm()) < 1e-10);
      CHECK(h.t < prev);
      prev = h.t;
    }
    // backward over 3 from (x, v) equals backward over 1 from the footprint
    // reached after backward time 2
    const auto& mid = std::get<ReachedInitialPlane>(trace_specular(d, 2.0, x, v).terminal);
    const auto& a = std::get<ReachedInitialPlane>(c.terminal);
    const auto& b = std::get<ReachedInitialPlane>(trace_specular(d, 1.0, mid.x, mid.v).terminal);
    CHECK((a.x - b.x).norm() < 1e-8);
    CHECK((a.v - b.v).norm() < 1e-8);
  }
}

TEST_CASE("rebound budget") {
  const Domain ball = Domain::ball(Vec3::Zero(), 1.0);
  TraceOptions opts;
  opts.max_rebounds = 3;
  CHECK_THROWS_AS(trace_specular(ball, 100.0, Vec3::Zero(), Vec3(1, 0, 0), opts), GeometryError);
}

TEST_CASE("convexity constant") {
  CHECK(Domain::ball(Vec3::Zero(), 2.0).convexity_margin(200, 1) >= 1.0 - 1e-12);
  CHECK(Domain::ellipsoid(Vec3::Zero(), Vec3(2, 1, 0.5)).convexity_margin(200, 1) >= 1.0 - 1e-12);
  CHECK(Domain::slab().convexity_constant() == 0.0);
}
