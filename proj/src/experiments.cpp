#include "kinetic/experiments.hpp"

#include "kinetic/diagnostics.hpp"
#include "kinetic/errors.hpp"
#include "kinetic/projections.hpp"
#include "kinetic/rng.hpp"
#include "kinetic/splitting.hpp"
#include "kinetic/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace kinetic {

namespace {

constexpr double kPi = std::numbers::pi;

Report start_report(const ExperimentConfig& cfg) {
  Report r;
  r.schema_version = kSchemaVersion;
  r.experiment = to_string(cfg.experiment);
  r.version = kVersion;
  r.seed = cfg.seed;
  r.config = cfg.source;
  return r;
}

std::string fmt(double x) { return format_double(x); }

double japanese_bracket(const Vec3& v) { return std::sqrt(1.0 + v.squaredNorm()); }

// Smooth datum with a wall-crossing x1 profile and an odd v1 part.
double smooth_datum(const Vec3& x, const Vec3& v) {
  return maxwellian(v) * (1.0 + 0.5 * std::sin(2.0 * kPi * x[0]) * std::cos(2.0 * kPi * x[1]) +
                          0.25 * v[0] / japanese_bracket(v));
}

// sup over v of mu(v) (1.5 + 0.25 v1 / <v>), attained on the v1 axis.
double smooth_datum_sup() {
  const auto g = [](double s) {
    return maxwellian(s * s) * (1.5 + 0.25 * s / std::sqrt(1.0 + s * s));
  };
  double best = 0.0, arg = 0.0;
  for (int i = 0; i <= 30000; ++i) {
    const double s = 1e-4 * i;
    if (g(s) > best) {
      best = g(s);
      arg = s;
    }
  }
  double a = std::max(0.0, arg - 1e-4), b = arg + 1e-4;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    if (g(c) > g(d)) b = d; else a = c;
  }
  return g(0.5 * (a + b));
}

// Uniform interior point (slab: x1 in (0,1), tangential in [0,1)).
Vec3 random_interior(const Domain& dom, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (dom.kind() == DomainKind::Slab) {
    Vec3 x(u(gen), u(gen), u(gen));
    x[0] = std::clamp(x[0], 1e-6, 1.0 - 1e-6);
    return x;
  }
  const auto [lo, hi] = dom.bounding_box();
  while (true) {
    const Vec3 x(lo[0] + (hi[0] - lo[0]) * u(gen), lo[1] + (hi[1] - lo[1]) * u(gen),
                 lo[2] + (hi[2] - lo[2]) * u(gen));
    if (dom.xi(x).value < -1e-6) return x;
  }
}

Vec3 random_velocity(double radius, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    const Vec3 v(u(gen), u(gen), u(gen));
    const double r2 = v.squaredNorm();
    if (r2 <= 1.0 && r2 > 1e-4) return radius * v;
  }
}

void add_solver_failure(Report& rep, const std::string& stage, const SolverError& e) {
  rep.checks.push_back(failed_check(stage, e.measured(), e.what()));
}

}  // namespace

Grids make_grids(const ExperimentConfig& cfg) {
  Grids g;
  g.velocity = std::make_shared<const VelocityGrid>(cfg.grid.velocity_n, cfg.grid.v_max);
  g.space = std::make_shared<const SpatialGrid>(cfg.domain.build(), cfg.grid.spatial_n);
  return g;
}

Field maxwellian_field(const Grids& g) {
  Field f(g.space, g.velocity);
  for (int a = 0; a < f.n_velocities(); ++a) f.values().col(a).setConstant(g.velocity->mu()[a]);
  return f;
}

Field initial_perturbation(const ExperimentConfig& cfg, const KineticSystem& sys) {
  Field f = sys.zeros();
  const InitialSpec& in = cfg.initial;
  if (in.kind == "anisotropic") {
    f.fill([](const Vec3&, const Vec3& v) { return (v[0] * v[0] - v[1] * v[1]) * maxwellian(v); });
    const double n = sup_weighted(f, sys.weight_samples());
    if (n > 0.0) f.values() *= in.amplitude / n;
  } else if (in.kind == "bump") {
    const Domain& dom = sys.space().domain();
    const Vec3 c = dom.kind() == DomainKind::Slab ? Vec3(0.5, 0.0, 0.0) : dom.center();
    f.fill([&](const Vec3& x, const Vec3& v) {
      const double r = dom.kind() == DomainKind::Slab ? std::abs(x[0] - c[0]) : (x - c).norm();
      if (r >= in.width) return 0.0;
      const double s = std::cos(0.5 * kPi * r / in.width);
      return in.amplitude * s * s * maxwellian(v);
    });
  }
  return f;
}

Report run_semigroup_specular(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  const ExperimentParams& p = cfg.params;
  const Domain dom = cfg.domain.build();
  const CollisionModel model(cfg.collision);
  const double nu0 = nu_floor(model);
  const double sup0 = smooth_datum_sup();
  const PhaseFunction f0 = smooth_datum;

  std::vector<Vec3> xs, vs;
  auto gen = stream_for(cfg.seed, 0);
  for (int i = 0; i < p.n_probes; ++i) {
    xs.push_back(random_interior(dom, gen));
    vs.push_back(random_velocity(4.0, gen));
  }

  Series decay{"decay", {"t", "max_ratio", "envelope"}, {}};
  double worst_ratio = 0.0;
  for (double t : p.times) {
    double r = 0.0;
    for (int i = 0; i < p.n_probes; ++i)
      r = std::max(r, std::abs(semigroup_specular(dom, model, f0, t, xs[i], vs[i])) /
                          (std::exp(-nu0 * t) * sup0));
    decay.add({t, r, std::exp(-nu0 * t)});
    worst_ratio = std::max(worst_ratio, r);
  }
  rep.checks.push_back(make_check("pointwise_decay", worst_ratio, "<=", 1.0,
                                  "max |S(t)f0| / (exp(-nu0 t) |f0|_inf), nu0 = " + fmt(nu0)));

  Series law{"semigroup_law", {"s", "t", "max_rel_error"}, {}};
  double worst_law = 0.0;
  for (std::size_t j = 0; j + 1 < p.times.size(); ++j) {
    const double s = p.times[j], t = p.times[j + 1];
    const PhaseFunction inner = [&](const Vec3& x, const Vec3& v) {
      return semigroup_specular(dom, model, f0, s, x, v);
    };
    double e = 0.0;
    for (int i = 0; i < p.n_probes; ++i) {
      const double composed = semigroup_specular(dom, model, inner, t, xs[i], vs[i]);
      const double direct = semigroup_specular(dom, model, f0, s + t, xs[i], vs[i]);
      e = std::max(e, std::abs(composed - direct) /
                          std::max(std::abs(direct), std::numeric_limits<double>::min()));
    }
    law.add({s, t, e});
    worst_law = std::max(worst_law, e);
  }
  rep.checks.push_back(make_check("semigroup_law", worst_law, "<=", 1e-8));

  // unfolded slab: x1 reflected on the doubled period, tangential free flight
  const Domain slab = Domain::slab();
  Series unfold{"slab_closed_form", {"t", "max_abs_error"}, {}};
  double worst_unfold = 0.0;
  auto gen2 = stream_for(cfg.seed, 1);
  std::vector<Vec3> sx, sv;
  for (int i = 0; i < p.n_probes; ++i) {
    sx.push_back(random_interior(slab, gen2));
    sv.push_back(random_velocity(4.0, gen2));
  }
  for (double t : p.times) {
    double e = 0.0;
    for (int i = 0; i < p.n_probes; ++i) {
      const Vec3& x = sx[i];
      const Vec3& v = sv[i];
      const double u = x[0] - v[0] * t;
      const double cell = std::floor(u);
      const double r = u - cell;
      const bool odd = static_cast<long long>(cell) % 2 != 0;
      Vec3 X = x - t * v, V = v;
      X[0] = odd ? 1.0 - r : r;
      if (odd) V[0] = -v[0];
      const double damp = std::exp(-model.nu(v) * t);
      const double exact = damp * f0(X, V);
      const double got = semigroup_specular(slab, model, f0, t, x, v);
      e = std::max(e, std::abs(got - exact) / (damp * sup0));
    }
    unfold.add({t, e});
    worst_unfold = std::max(worst_unfold, e);
  }
  rep.checks.push_back(make_check("slab_closed_form", worst_unfold, "<=", 1e-10,
                                  "relative to exp(-nu(v) t) |f0|_inf"));
  rep.series = {decay, law, unfold};
  return rep;
}

Report run_semigroup_diffusive(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  const ExperimentParams& p = cfg.params;
  const Domain dom = cfg.domain.build();
  const CollisionModel model(cfg.collision);
  const WallMeasure wall;
  const double nu0 = nu_floor(model);
  const double ratio_sup = 1.75;  // sup |f0 / mu|
  // vanishes to fourth order at the walls: wall emission starts smoothly and the
  // solution has no low-order kink along the characteristics leaving the walls
  const PhaseFunction f0 = [](const Vec3& x, const Vec3& v) {
    const double s = std::sin(kPi * x[0]);
    return maxwellian(v) * s * s * s * s *
           (1.0 + 0.5 * std::sin(2.0 * kPi * x[0]) + 0.25 * v[0] / japanese_bracket(v));
  };

  // deterministic stepper on the configured grid and on a refined one
  const auto stepper = [&](int nv, int nx, double dt, int steps) {
    auto vg = std::make_shared<const VelocityGrid>(nv, cfg.grid.v_max);
    auto sg = std::make_shared<const SpatialGrid>(dom, nx);
    Eigen::VectorXd nu(vg->size());
    for (int a = 0; a < vg->size(); ++a) nu[a] = model.nu(vg->node(a));
    const TransportStep step(sg, vg, BoundaryCondition::Diffuse, dt, nu);
    Field f(sg, vg);
    f.fill(f0);
    Field g = f.zeros_like();
    for (int n = 0; n < steps; ++n) {
      step.apply(f, g);
      std::swap(f, g);
    }
    return f;
  };
  const double dt = cfg.solver.dt;
  const int steps = static_cast<int>(std::lround(p.t_compare / dt));
  const double t_cmp = steps * dt;
  const Field coarse = stepper(cfg.grid.velocity_n, cfg.grid.spatial_n, dt, steps);
  // spatial and velocity refinements are taken separately so each error
  // term has its own two-grid estimate
  const Field fine_x = stepper(cfg.grid.velocity_n, 2 * cfg.grid.spatial_n, 0.5 * dt, 2 * steps);
  const Field fine_v =
      stepper(cfg.grid.velocity_n * p.velocity_refine, cfg.grid.spatial_n, dt, steps);

  std::vector<int> nodes;
  for (int a = 0; a < coarse.n_velocities(); ++a)
    if (coarse.velocity().node(a).norm() <= 3.0) nodes.push_back(a);
  auto gen = stream_for(cfg.seed, 2);
  std::uniform_int_distribution<int> pick_cell(0, coarse.n_cells() - 1);
  std::uniform_int_distribution<int> pick_node(0, static_cast<int>(nodes.size()) - 1);

  Series cmp{"mc_vs_stepper",
             {"x1", "x2", "x3", "v1", "v2", "v3", "mc", "stderr", "coarse", "fine_x", "fine_v",
              "extrapolated", "tolerance"},
             {}};
  double worst = 0.0;
  int failures = 0;
  std::vector<std::pair<Vec3, Vec3>> probes;
  for (int i = 0; i < p.n_probes; ++i) {
    const int k = pick_cell(gen);
    const int a = nodes[pick_node(gen)];
    const Vec3 x = coarse.space().center(k), v = coarse.velocity().node(a);
    probes.emplace_back(x, v);
    const DiffusiveEstimate e =
        semigroup_diffusive(dom, model, wall, f0, t_cmp, x, v, p.n_chains, p.p_max,
                            splitmix64(cfg.seed + 0x100 + static_cast<std::uint64_t>(i)), ratio_sup);
    // first order in h and dt: Richardson in space-time; the velocity
    // correction is added as is and its size counted in the tolerance
    const double c = coarse(k, a);
    const double fx = fine_x.interpolate(x, v);
    const double fv = fine_v.interpolate(x, v);
    const double det = 2.0 * fx - c + (fv - c);
    const double tol =
        std::abs(fx - c) + std::abs(fv - c) + 3.0 * e.stderr_ + e.truncation_bound;
    const double r = std::abs(e.estimate - det) / tol;
    if (r > 1.0) ++failures;
    worst = std::max(worst, r);
    cmp.add({x[0], x[1], x[2], v[0], v[1], v[2], e.estimate, e.stderr_, c, fx, fv, det, tol});
  }
  rep.checks.push_back(make_check(
      "mc_vs_stepper", worst, "<=", 1.0,
      "max |mc - extrapolated| / (|fine_x - coarse| + |fine_v - coarse| + 3 stderr + tail) over " +
          std::to_string(p.n_probes) + " probes at t = " + fmt(t_cmp) + ", " +
          std::to_string(failures) + " outside"));

  // weighted decay of the Monte-Carlo estimate
  const int n_decay = std::min<int>(20, static_cast<int>(probes.size()));
  Series decay{"weighted_decay", {"t", "sup_weighted"}, {}};
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < p.decay_times.size(); ++j) {
    const double t = p.decay_times[j];
    double s = 0.0;
    for (int i = 0; i < n_decay; ++i) {
      const auto& [x, v] = probes[i];
      const DiffusiveEstimate e = semigroup_diffusive(
          dom, model, wall, f0, t, x, v, p.n_chains, p.p_max,
          splitmix64(cfg.seed + 0x10000 + 64 * j + static_cast<std::uint64_t>(i)), ratio_sup);
      s = std::max(s, cfg.weight(v) * std::abs(e.estimate));
    }
    decay.add({t, s});
    pts.emplace_back(t, s);
  }
  try {
    const DecayFit fit = decay_fit(pts, 0.0);
    rep.fits.push_back({"weighted_decay", fit, nu0});
    rep.checks.push_back(make_check("decay_rate", fit.lambda_hat, ">=", p.decay_fraction * nu0,
                                    "fraction " + fmt(p.decay_fraction) + " of nu0 = " + fmt(nu0)));
  } catch (const Error& e) {
    rep.checks.push_back(failed_check("decay_rate", 0.0, e.what()));
  }
  rep.series = {cmp, decay};
  return rep;
}

Report run_chains(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  const ExperimentParams& p = cfg.params;
  const Domain dom = cfg.domain.build();
  const WallMeasure wall;
  if (!dom.contains(p.x)) throw ConfigError("params.x", "must lie inside the domain");
  const auto est = escape_profile(dom, wall, p.escape_t, p.x, p.v, p.p_values, p.escape_chains,
                                  cfg.seed);
  const double n = p.escape_chains;

  Series s{"escape", {"p", "probability", "stderr", "log_probability", "upper_bound"}, {}};
  std::vector<double> logp, sig;
  std::vector<bool> bound;
  int increases = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const bool zero = est[i].value == 0.0;
    // no active chain: 3 / n is a 95% upper bound on the probability
    const double lp = zero ? std::log(3.0 / n) : std::log(est[i].value);
    logp.push_back(lp);
    sig.push_back(zero ? 0.0 : est[i].stderr_ / est[i].value);
    bound.push_back(zero);
    if (i > 0 && est[i].value > est[i - 1].value) ++increases;
    s.add({static_cast<double>(p.p_values[i]), est[i].value, est[i].stderr_, lp, zero ? 1.0 : 0.0});
  }
  rep.checks.push_back(make_check("escape_monotone", increases, "<=", 0.0,
                                  "number of increases in p"));

  // log P concave in p: slopes non-increasing within two standard errors
  double worst = -std::numeric_limits<double>::infinity();
  int triples = 0;
  for (std::size_t i = 0; i + 2 < logp.size(); ++i) {
    if (bound[i + 1]) {
      rep.notices.push_back("escape tail: p = " + std::to_string(p.p_values[i + 1]) +
                            " has no active chain; later slopes skipped");
      break;
    }
    const double d1 = p.p_values[i + 1] - p.p_values[i];
    const double d2 = p.p_values[i + 2] - p.p_values[i + 1];
    const double s1 = (logp[i + 1] - logp[i]) / d1;
    const double s2 = (logp[i + 2] - logp[i + 1]) / d2;
    const double allow = 2.0 * (sig[i] / d1 + sig[i + 1] / d1 + sig[i + 1] / d2 + sig[i + 2] / d2);
    worst = std::max(worst, s2 - s1 - allow);
    ++triples;
  }
  if (triples > 0) {
    rep.checks.push_back(make_check("escape_log_concave", worst, "<=", 0.0,
                                    "max slope increase beyond 2 stderr over " +
                                        std::to_string(triples) + " triples"));
  } else {
    rep.checks.push_back(failed_check("escape_log_concave", 0.0, "too few resolved p values"));
  }
  if (logp.size() >= 2) {
    const std::size_t j = logp.size() - 1;
    const double tail = (logp[j] - logp[j - 1]) / (p.p_values[j] - p.p_values[j - 1]);
    rep.checks.push_back(make_check("escape_tail_slope", tail, "<", 0.0,
                                    bound[j] ? "last point is an upper bound" : ""));
  }
  rep.series = {s};
  return rep;
}

Report run_splitting_constants(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  const ExperimentParams& p = cfg.params;
  const WallMeasure wall;
  rep.checks.push_back(make_check("c_mu", std::abs(wall.c_mu() - std::sqrt(2.0 * kPi)), "<=", 1e-8,
                                  "|c_mu - sqrt(2 pi)|"));

  const CollisionModel model(cfg.collision);
  const double g = model.gamma(), bi = model.b_inf(), lb = model.l_b();
  const double inf = std::numeric_limits<double>::infinity();
  const double k = cfg.weight.kind() == WeightKind::Polynomial ? cfg.weight.k() : 10.0;
  Series consts{"constants", {"q", "k_star", "k", "phi"}, {}};
  consts.add({inf, kq_star(inf, g, bi, lb), k, phi_q(inf, k, g, bi, lb)});
  consts.add({1.0, kq_star(1.0, g, bi, lb), k, phi_q(1.0, k, g, bi, lb)});
  const bool hard_spheres = g == 1.0 && cfg.collision.b_coefficients == std::vector<double>{1.0};
  if (hard_spheres) {
    rep.checks.push_back(make_check("k_star_inf", std::abs(kq_star(inf, g, bi, lb) - 6.0), "<=", 1e-12));
    rep.checks.push_back(make_check("k_star_1", std::abs(kq_star(1.0, g, bi, lb) - 2.0), "<=", 1e-12));
    rep.checks.push_back(make_check("phi_inf_10", std::abs(phi_q(inf, 10.0, g, bi, lb) - 0.5), "<=", 1e-12));
    rep.checks.push_back(make_check("phi_1_10", std::abs(phi_q(1.0, 10.0, g, bi, lb) - 1.0 / 3.0), "<=", 1e-12));
  } else {
    rep.notices.push_back("closed-form constants checked for hard spheres only");
  }

  const VelocityGrid vg(cfg.grid.velocity_n, cfg.grid.v_max);
  const CollisionTable table(vg, model);
  const Eigen::MatrixXd L = table.dense_L();
  const Weight poly = Weight::polynomial(k);
  const Weight stretch = Weight::stretch_exp(p.stretch_kappa, p.stretch_alpha);
  const double phi = phi_q(p.q, k, g, bi, lb);

  Series trend{"delta_trend",
               {"delta", "Delta_polynomial", "Delta_stretch_exp", "Delta_tilde", "phi",
                "support_radius", "R_delta", "outside_max", "exactness"},
               {}};
  std::vector<double> dp, ds, dtl;
  double worst_exact = 0.0, worst_outside = 0.0, worst_excess = -1.0;
  for (double delta : p.deltas) {
    const SplitOperator split(table, delta);
    double exact = 0.0, outside = 0.0;
    for (int j = 0; j < 20; ++j) {
      auto gen = stream_for(cfg.seed, 100 + static_cast<std::uint64_t>(j));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Eigen::VectorXd h(vg.size());
      for (int a = 0; a < vg.size(); ++a) h[a] = u(gen);
      const Eigen::VectorXd lhs = split.A() * h + split.B2() * h - split.nu().cwiseProduct(h);
      const Eigen::VectorXd rhs = L * h;
      exact = std::max(exact, (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff());
      const Eigen::VectorXd ah = split.A() * h;
      for (int a = 0; a < vg.size(); ++a)
        if (vg.node(a).norm() > split.R_delta()) outside = std::max(outside, std::abs(ah[a]));
    }
    const double radius = split.measured_support_radius();
    worst_exact = std::max(worst_exact, exact);
    worst_outside = std::max(worst_outside, outside);
    worst_excess = std::max(worst_excess, radius - split.R_delta());

    ProbeFamily probes;
    probes.seed = cfg.seed;
    dp.push_back(estimate_Delta(split, poly, p.q, probes).value);
    ds.push_back(estimate_Delta(split, stretch, p.q, probes).value);
    dtl.push_back(estimate_Delta_tilde(split, p.k_tilde, probes).value);
    trend.add({delta, dp.back(), ds.back(), dtl.back(), phi, radius, split.R_delta(), outside,
               exact});
  }
  rep.checks.push_back(make_check("splitting_exactness", worst_exact, "<=", 1e-9,
                                  "|A h + B2 h - nu h - L h|_inf / |L h|_inf"));
  rep.checks.push_back(make_check("support_outside", worst_outside, "<=", 0.0,
                                  "max |A h| at nodes with |v| > 2 / delta"));
  rep.checks.push_back(make_check("support_radius", worst_excess, "<=", 0.0,
                                  "largest nonzero row speed minus 2 / delta"));

  const auto increases = [](const std::vector<double>& v) {
    double worst = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) worst = std::max(worst, v[i] - v[i - 1]);
    return worst;
  };
  rep.checks.push_back(make_check("Delta_polynomial_monotone", increases(dp), "<=", 0.0,
                                  "largest increase as delta decreases"));
  rep.checks.push_back(make_check("Delta_stretch_exp_monotone", increases(ds), "<=", 0.0,
                                  "largest increase as delta decreases"));
  rep.checks.push_back(make_check("Delta_polynomial_final", dp.back(), "<=", phi + p.phi_margin,
                                  "phi = " + fmt(phi) + " plus margin " + fmt(p.phi_margin)));
  rep.checks.push_back(make_check("Delta_stretch_exp_ratio", ds.back() / ds.front(), "<=",
                                  p.ratio_bound, "last over first delta"));
  rep.checks.push_back(make_check("Delta_tilde_ratio", dtl.back() / dtl.front(), "<=",
                                  p.ratio_bound, "last over first delta"));
  rep.series = {consts, trend};
  return rep;
}

namespace {

struct PerturbativeRun {
  std::unique_ptr<KineticSystem> sys;
  std::optional<Field> f0;
  CoupledResult coupled;
  double nu0 = 0.0;
};

std::unique_ptr<KineticSystem> make_system(const ExperimentConfig& cfg, const Grids& g,
                                           bool linear) {
  SolverConfig s = cfg.solver_config();
  if (linear) s.disable_Q = true;
  return std::make_unique<KineticSystem>(g.space, g.velocity, cfg.collision, s);
}

Series norm_table(const KineticSystem& sys, const CoupledResult& r) {
  Series s{"norms", {"t", "norm_f", "norm_f1", "norm_f2", "mass", "energy"}, {}};
  const Eigen::VectorXd& m = sys.weight_samples();
  for (std::size_t n = 0; n < r.f.size(); ++n)
    s.add({r.f.times[n], sup_weighted(r.f.fields[n], m), sup_weighted(r.f1.fields[n], m),
           sup_weighted(r.f2.fields[n], m), r.f.fields[n].mass(), r.f.fields[n].energy()});
  return s;
}

// Coupled solve with the shared checks of solve_linear and solve_nonlinear.
bool perturbative(const ExperimentConfig& cfg, bool linear, Report& rep, PerturbativeRun& run) {
  const ExperimentParams& p = cfg.params;
  const Grids g = make_grids(cfg);
  run.sys = make_system(cfg, g, linear);
  const KineticSystem& sys = *run.sys;
  const SolverConfig& sc = sys.config();
  const Eigen::VectorXd& m = sys.weight_samples();
  run.f0 = initial_perturbation(cfg, sys);
  run.nu0 = nu_floor(sys.model());
  const double n0 = sup_weighted(*run.f0, m);
  rep.checks.push_back(make_check("smallness", n0, "<=", sc.eta0, "|f0| in L^inf(m)"));
  if (sys.transport().cfl_warning())
    rep.notices.push_back("dt V_max exceeds the domain width");
  try {
    run.coupled = solve_coupled(sys, *run.f0);
  } catch (const SolverError& e) {
    add_solver_failure(rep, "coupled_solve", e);
    return false;
  }
  const CoupledResult& r = run.coupled;
  rep.checks.push_back(make_check("outer_iterations", r.outer_iterations, "<=", sc.max_outer_iters,
                                  "converged to " + fmt(sc.tol_fixed_point)));
  rep.checks.push_back(make_check("conservation_moment", r.max_moment, "<=", sc.tol_moment,
                                  "largest Pi_G coefficient of f"));
  const double nmax = sup_weighted(r.f, m);
  rep.checks.push_back(make_check("norm_bound", nmax, "<=", p.norm_factor * n0,
                                  fmt(p.norm_factor) + " |f0|"));
  try {
    const DecayFit fit = decay_fit(norm_series(r.f, m), sc.burn_in);
    rep.fits.push_back({"norm_decay", fit, run.nu0});
    rep.checks.push_back(make_check("decay_rate", fit.lambda_hat, ">", p.lambda_fraction * run.nu0,
                                    "fraction " + fmt(p.lambda_fraction) + " of nu0 = " +
                                        fmt(run.nu0)));
  } catch (const Error& e) {
    rep.checks.push_back(failed_check("decay_rate", 0.0, e.what()));
  }
  if (p.check_equivalence) {
    const FullResult full = solve_full(sys, *run.f0, FullForm::Perturbation);
    const double d = sup_weighted_distance(full.trajectory, r.f, m);
    // outer tolerance plus the inner one, relative to the solution size
    const double tol = (1.0 + 0.1) * sc.tol_fixed_point * nmax;
    rep.checks.push_back(make_check("full_equivalence", d, "<=", 2.0 * tol,
                                    "time-sup weighted distance to the direct scheme"));
  }
  Series norms = norm_table(sys, r);
  Series outer{"outer_iterations", {"iteration", "relative_distance", "inner_iterations",
                                    "inner_contraction"}, {}};
  for (std::size_t l = 0; l < r.inner_iterations.size(); ++l)
    outer.add({static_cast<double>(l + 1), l == 0 ? std::nan("") : r.outer_distances[l - 1],
               static_cast<double>(r.inner_iterations[l]), r.inner_contraction[l]});
  rep.series.push_back(norms);
  rep.series.push_back(outer);
  return true;
}

}  // namespace

Report run_solve_linear(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  PerturbativeRun run;
  perturbative(cfg, true, rep, run);
  return rep;
}

Report run_solve_nonlinear(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  PerturbativeRun run;
  if (!perturbative(cfg, false, rep, run)) return rep;
  if (cfg.params.check_uniqueness) {
    try {
      const UniquenessReport u = uniqueness_probe(*run.sys, *run.f0, cfg.params.uniqueness_scale,
                                                  cfg.seed, &run.coupled);
      rep.checks.push_back(make_check(
          "uniqueness", u.distance, "<=", u.bound,
          "restart " + fmt(u.restart_distance) + ", perturbed " + fmt(u.perturbed_distance) +
              ", injected " + fmt(u.injected)));
    } catch (const SolverError& e) {
      add_solver_failure(rep, "uniqueness", e);
    }
  }
  return rep;
}

Report run_positivity(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  const ExperimentParams& p = cfg.params;
  const Grids g = make_grids(cfg);
  const auto sys = make_system(cfg, g, false);
  const Field f0 = initial_perturbation(cfg, *sys);
  const Field mu = maxwellian_field(g);
  Field F0 = mu;
  F0.values() += f0.values();
  rep.checks.push_back(make_check("initial_nonnegative", F0.values().minCoeff(), ">=", 0.0,
                                  "min of mu + f0"));
  CoupledResult r;
  try {
    r = solve_coupled(*sys, f0);
  } catch (const SolverError& e) {
    add_solver_failure(rep, "coupled_solve", e);
    return rep;
  }
  Trajectory F;
  for (std::size_t n = 0; n < r.f.size(); ++n) {
    Field x = mu;
    x.values() += r.f.fields[n].values();
    F.times.push_back(r.f.times[n]);
    F.fields.push_back(std::move(x));
  }
  const double tol_pos = sys->config().tol_pos;
  const LowerBoundReport lb = check_lower_bound(F, p.tau, tol_pos);
  rep.checks.push_back(make_check("min_value", lb.min_value, ">=", -tol_pos,
                                  lb.failure.empty() ? "t >= tau" : lb.failure));
  rep.checks.push_back(make_check("mass", lb.mass, ">", 0.0));
  rep.checks.push_back(make_check("local_energy", lb.local_energy_sup, "<",
                                  std::numeric_limits<double>::infinity()));
  rep.checks.push_back(make_check("rho_hat", lb.rho_hat, ">", 0.0, "tau = " + fmt(p.tau)));
  rep.checks.push_back(make_check("theta_hat", lb.theta_hat, ">", 0.0, "tau = " + fmt(p.tau)));

  // continuity along short lines away from the grazing set, reported only
  std::vector<ProbeLine> lines;
  const Domain& dom = g.space->domain();
  const Vec3 c = dom.kind() == DomainKind::Slab ? Vec3(0.5, 0.0, 0.0) : dom.center();
  const Vec3 span = dom.kind() == DomainKind::Slab ? Vec3(0.3, 0.0, 0.0)
                                                   : Vec3(0.3 * dom.semi_axes()[0], 0.0, 0.0);
  for (int a = 0; a < g.velocity->size(); a += std::max(1, g.velocity->size() / 16))
    lines.push_back({c - span, c + span, g.velocity->node(a)});
  const ContinuityReport cr = continuity_probe(F.back(), lines);
  Series cont{"continuity", {"n_probes", "n_skipped", "max_jump"}, {}};
  cont.add({static_cast<double>(cr.n_probes), static_cast<double>(cr.n_skipped), cr.max_jump});
  for (const auto& s : cr.notices) rep.notices.push_back(s);

  Series bound{"lower_bound", {"tau", "rho_hat", "theta_hat", "mass", "local_energy_sup",
                               "min_value"}, {}};
  bound.add({p.tau, lb.rho_hat, lb.theta_hat, lb.mass, lb.local_energy_sup, lb.min_value});
  rep.series = {bound, cont};
  return rep;
}

Report run_conservation(const ExperimentConfig& cfg) {
  Report rep = start_report(cfg);
  const ExperimentParams& p = cfg.params;
  const Grids g = make_grids(cfg);
  const auto sys = make_system(cfg, g, false);
  const Field mu = maxwellian_field(g);
  Field F0 = mu;
  F0.values() += initial_perturbation(cfg, *sys).values();

  const FullResult run = solve_full(*sys, F0, FullForm::Full);
  if (run.negativity_flag)
    rep.notices.push_back("negative value " + fmt(run.min_value) + " beyond tol_pos");
  const ConservationRecord c = check_conservation(run.trajectory, cfg.bc);
  rep.checks.push_back(make_check("mass_drift_rate", c.mass_rate(), "<=", p.mass_rate,
                                  "relative drift per unit time"));
  if (c.energy_checked) {
    rep.checks.push_back(make_check("energy_drift", c.energy_drift, "<=", p.energy_drift,
                                    "relative drift over the horizon"));
  } else {
    rep.notices.push_back("energy drift " + fmt(c.energy_drift) + " reported, not checked (" +
                          std::string(to_string(cfg.bc)) + " walls)");
  }
  if (c.angular_checked)
    rep.notices.push_back("angular momentum drift " + fmt(c.angular_drift) + " about (" +
                          fmt(c.axis[0]) + ", " + fmt(c.axis[1]) + ", " + fmt(c.axis[2]) + ")");

  Series s{"conservation", {"t", "mass", "energy", "angular_momentum", "min_value"}, {}};
  for (std::size_t n = 0; n < run.trajectory.size(); ++n) {
    const Field& f = run.trajectory.fields[n];
    s.add({run.trajectory.times[n], f.mass(), f.energy(),
           c.angular_checked ? angular_momentum(f, c.axis) : 0.0, f.values().minCoeff()});
  }
  rep.series.push_back(s);

  if (p.check_fixed_point) {
    const FullResult eq = solve_full(*sys, mu, FullForm::Full);
    const double scale = mu.values().cwiseAbs().maxCoeff();
    Series fp{"maxwellian_fixed_point", {"t", "max_rel_deviation"}, {}};
    double worst = 0.0;
    for (std::size_t n = 0; n < eq.trajectory.size(); ++n) {
      const double d = (eq.trajectory.fields[n].values() - mu.values()).cwiseAbs().maxCoeff() / scale;
      worst = std::max(worst, d);
      fp.add({eq.trajectory.times[n], d});
    }
    rep.checks.push_back(make_check("maxwellian_fixed_point", worst, "<=", p.fixed_point_tol,
                                    "max |F(t) - mu| / max mu"));
    rep.series.push_back(fp);
  }
  return rep;
}

Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentTag::SemigroupSpecular: return run_semigroup_specular(cfg);
    case ExperimentTag::SemigroupDiffusive: return run_semigroup_diffusive(cfg);
    case ExperimentTag::Chains: return run_chains(cfg);
    case ExperimentTag::SplittingConstants: return run_splitting_constants(cfg);
    case ExperimentTag::SolveLinear: return run_solve_linear(cfg);
    case ExperimentTag::SolveNonlinear: return run_solve_nonlinear(cfg);
    case ExperimentTag::Positivity: return run_positivity(cfg);
    case ExperimentTag::Conservation: return run_conservation(cfg);
  }
  throw Error("unhandled experiment");
}

}  // namespace kinetic
