#include "doctest.h"

#include "kinetic/errors.hpp"
#include "kinetic/weights.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace kinetic;

namespace {

struct Grids {
  std::shared_ptr<const VelocityGrid> v = std::make_shared<const VelocityGrid>(8, 6.0);
  std::shared_ptr<const SpatialGrid> slab = std::make_shared<const SpatialGrid>(Domain::slab(), 8);
  std::shared_ptr<const SpatialGrid> ball =
      std::make_shared<const SpatialGrid>(Domain::ball(Vec3::Zero(), 1.0), 6);
};

Field random_field(const std::shared_ptr<const SpatialGrid>& s,
                   const std::shared_ptr<const VelocityGrid>& v, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(s, v);
  f.fill([&](const Vec3&, const Vec3& w) { return u(gen) * maxwellian(w); });
  return f;
}

const NormTag kTags[] = {NormTag::LinfXVm, NormTag::L1vLinfXm, NormTag::L2Mu,
                         NormTag::LinfBoundaryM};

}  // namespace

TEST_CASE("weight values") {
  CHECK(Weight::polynomial(10.0)(Vec3(1, 1, 1)) == doctest::Approx(std::pow(4.0, 5.0)));
  CHECK(Weight::stretch_exp(0.1, 1.0)(Vec3(3, 4, 0)) == doctest::Approx(std::exp(0.5)));
  const double guo = Weight::guo(5.0)(Vec3(0, 0, 2));
  CHECK(guo == doctest::Approx(std::pow(5.0, 2.5) / std::sqrt(maxwellian(4.0))));
  for (double s : {0.0, 0.5, 3.0, 10.0}) {
    CHECK(Weight::polynomial(3.0).at_speed(s) >= 1.0);
    CHECK(Weight::stretch_exp(0.2, 1.5).at_speed(s) >= 1.0);
  }
}

TEST_CASE("admissibility flags") {
  const double bi = 1.0, lb = 4.0 * std::numbers::pi;
  CHECK(Weight::polynomial(10.0).admissible_qinf(1.0, bi, lb));
  CHECK_FALSE(Weight::polynomial(5.0).admissible_qinf(1.0, bi, lb));
  CHECK(Weight::polynomial(3.0).admissible_q1(1.0, bi, lb));
  CHECK_FALSE(Weight::polynomial(2.0).admissible_q1(1.0, bi, lb));
  CHECK(Weight::polynomial(7.0).admissible_mixed(1.0));
  CHECK_FALSE(Weight::polynomial(6.0).admissible_mixed(1.0));
}

TEST_CASE("norm examples") {
  Grids g;
  const Weight m = Weight::polynomial(10.0);
  Field f(g.slab, g.v);
  f.fill([&](const Vec3&, const Vec3& v) { return 1.0 / m(v); });
  CHECK(norm(f, m, NormTag::LinfXVm).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(norm(f, m, NormTag::L1vLinfXm).value ==
        doctest::Approx(g.v->weight() * g.v->size()).epsilon(1e-13));

  Field mu(g.slab, g.v);
  mu.fill([](const Vec3&, const Vec3& v) { return maxwellian(v); });
  // int mu^2 / mu = int mu, times |Omega| = 1
  CHECK(norm(mu, m, NormTag::L2Mu).value ==
        doctest::Approx(std::sqrt(g.v->maxwellian_mass())).epsilon(1e-13));
  Field mub(g.ball, g.v);
  mub.fill([](const Vec3&, const Vec3& v) { return maxwellian(v); });
  const double vol = g.ball->size() * g.ball->cell_volume();
  CHECK(norm(mub, m, NormTag::L2Mu).value ==
        doctest::Approx(std::sqrt(g.v->maxwellian_mass() * vol)).epsilon(1e-13));
}

TEST_CASE("norm axioms on random fields") {
  Grids g;
  std::mt19937_64 gen(9);
  const Weight weights[] = {Weight::polynomial(10.0), Weight::stretch_exp(0.1, 1.0)};
  for (const auto& space : {g.slab, g.ball}) {
    for (const Weight& m : weights) {
      for (int i = 0; i < 20; ++i) {
        const Field f = random_field(space, g.v, gen), h = random_field(space, g.v, gen);
        Field sum = f, scaled = f, bigger = f;
        sum.values() += h.values();
        scaled.values() *= -2.5;
        bigger.values() = f.values().cwiseAbs() * 1.5;
        for (NormTag tag : kTags) {
          const double nf = norm(f, m, tag).value;
          CHECK(nf >= 0.0);
          CHECK(norm(sum, m, tag).value <= nf + norm(h, m, tag).value + 1e-12);
          CHECK(norm(scaled, m, tag).value == doctest::Approx(2.5 * nf).epsilon(1e-12));
          CHECK(norm(bigger, m, tag).value >= nf);
        }
      }
    }
  }
}

TEST_CASE("mixed-norm ordering") {
  Grids g;
  std::mt19937_64 gen(10);
  const double k = 8.0;
  double c_grid = 0.0;
  for (int a = 0; a < g.v->size(); ++a)
    c_grid += g.v->weight() * std::pow(japanese(g.v->node(a).norm()), 2.0 - k);
  for (int i = 0; i < 20; ++i) {
    const Field f = random_field(g.slab, g.v, gen);
    const double lhs = norm(f, Weight::polynomial(2.0), NormTag::L1vLinfXm).value;
    CHECK(lhs <= c_grid * norm(f, Weight::polynomial(k), NormTag::LinfXVm).value * (1 + 1e-12));
  }
}

TEST_CASE("Guo weight overflow flag") {
  Grids g;
  Field slow(g.slab, g.v);
  slow.fill([](const Vec3&, const Vec3& v) { return std::exp(-0.1 * v.squaredNorm()); });
  CHECK(norm(slow, Weight::guo(5.0), NormTag::LinfXVm).overflow);
  Field fast(g.slab, g.v);
  fast.fill([](const Vec3&, const Vec3& v) { return maxwellian(v); });
  CHECK_FALSE(norm(fast, Weight::guo(5.0), NormTag::LinfXVm).overflow);
}

TEST_CASE("embedding into the Guo space") {
  const Weight guo = Weight::guo(5.0);
  CHECK(embed_check(Weight::polynomial(10.0), guo));
  CHECK(embed_check(Weight::stretch_exp(0.1, 1.0), guo));
  CHECK(embed_check(Weight::stretch_exp(3.0, 1.9), guo));
  CHECK_FALSE(embed_check_exponential(0.6, 2.0, guo));
  CHECK(embed_check_exponential(0.2, 2.0, guo));
  CHECK_THROWS_AS(embed_check(Weight::polynomial(2.0), Weight::polynomial(3.0)), Error);
}
