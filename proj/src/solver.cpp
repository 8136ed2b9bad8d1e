#include "kinetic/solver.hpp"

#include "kinetic/errors.hpp"
#include "kinetic/projections.hpp"
#include "kinetic/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kinetic {

int SolverConfig::n_steps() const { return static_cast<int>(std::lround(T / dt)); }

void SolverConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("solver.delta", "must lie in (0,1)");
  if (!(dt > 0.0)) throw ConfigError("solver.dt", "must be positive");
  if (!(T > 0.0)) throw ConfigError("solver.T", "must be positive");
  if (std::abs(n_steps() * dt - T) > 1e-9 * T)
    throw ConfigError("solver.T", "must be a whole number of steps");
  if (!(tol_fixed_point > 0.0)) throw ConfigError("solver.tol_fixed_point", "must be positive");
  if (max_inner_iters < 1) throw ConfigError("solver.max_inner_iters", "must be at least 1");
  if (max_outer_iters < 1) throw ConfigError("solver.max_outer_iters", "must be at least 1");
  if (!(eta0 > 0.0 && eta1 > 0.0 && eta2 > 0.0))
    throw ConfigError("solver.eta", "thresholds must be positive");
  if (!(tol_moment > 0.0)) throw ConfigError("solver.tol_moment", "must be positive");
  if (!(tol_pos > 0.0)) throw ConfigError("solver.tol_pos", "must be positive");
  if (burn_in < 0.0) throw ConfigError("solver.burn_in", "must be non-negative");
}

double sup_weighted(const Field& f, const Eigen::VectorXd& m) {
  return (f.values().cwiseAbs() * m.asDiagonal()).maxCoeff();
}

double sup_weighted(const Trajectory& traj, const Eigen::VectorXd& m) {
  double s = 0.0;
  for (const Field& f : traj.fields) s = std::max(s, sup_weighted(f, m));
  return s;
}

double sup_weighted_distance(const Trajectory& a, const Trajectory& b, const Eigen::VectorXd& m) {
  if (a.size() != b.size()) throw Error("trajectories have different lengths");
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n)
    s = std::max(s, ((a.fields[n].values() - b.fields[n].values()).cwiseAbs() * m.asDiagonal())
                        .maxCoeff());
  return s;
}

KineticSystem::KineticSystem(std::shared_ptr<const SpatialGrid> space,
                             std::shared_ptr<const VelocityGrid> velocity,
                             const CollisionParams& collision, const SolverConfig& cfg)
    : cfg_(cfg), space_(std::move(space)), velocity_(std::move(velocity)) {
  cfg_.validate();
  model_ = std::make_unique<CollisionModel>(collision);
  table_ = std::make_unique<CollisionTable>(*velocity_, *model_);
  // explicit loss term: dt nu_max <= 1 keeps the update monotone
  if (cfg_.dt * table_->nu().maxCoeff() > 1.0)
    throw ConfigError("solver.dt", "dt * max nu exceeds 1 on this velocity grid");
  split_ = std::make_unique<SplitOperator>(*table_, cfg_.delta);
  L_ = table_->dense_L();
  m_ = cfg_.weight.sample(*velocity_);
  const double step = cfg_.strang ? 0.5 * cfg_.dt : cfg_.dt;
  transport_ = std::make_unique<TransportStep>(space_, velocity_, cfg_.bc, step);
}

Trajectory KineticSystem::zero_trajectory() const {
  Trajectory t;
  const int n = cfg_.n_steps();
  for (int i = 0; i <= n; ++i) {
    t.times.push_back(i * cfg_.dt);
    t.fields.push_back(zeros());
  }
  return t;
}

void KineticSystem::add_matrix(const Eigen::MatrixXd& M, const Field& f, double c,
                               Field& out) const {
  out.values().noalias() += c * (f.values() * M.transpose());
}

void KineticSystem::add_Q(const Field& f, const Field& g, double c, Field& out) const {
  Field q = zeros();
  table_->q_bilinear_batch(f.values().data(), g.values().data(), q.values().data(),
                           f.n_cells());
  out.values() += c * q.values();
}

void KineticSystem::add_absorption(const Field& f, double c, Field& out) const {
  out.values() -= c * (f.values() * nu().asDiagonal());
}

Field KineticSystem::stage(const Field& f) const {
  if (!cfg_.strang) return f;
  return transport_->apply(f);
}

Field KineticSystem::finish(const Field& updated) const { return transport_->apply(updated); }

namespace {

void check_finite(const Field& f, const char* what) {
  if (!f.values().allFinite()) throw SolverError(std::string(what) + ": blow-up", 0.0);
}

}  // namespace

F1Result solve_f1(const KineticSystem& sys, const Field& f0, const Trajectory* g,
                  const Trajectory* start, double tol) {
  const SolverConfig& cfg = sys.config();
  const Eigen::VectorXd& m = sys.weight_samples();
  const int N = cfg.n_steps();
  const double dt = cfg.dt;
  if (tol <= 0.0) tol = cfg.tol_fixed_point;
  const double n0 = sup_weighted(f0, m);
  if (n0 > cfg.eta1 * (1.0 + 1e-12))
    throw SolverError("smallness violated: |f0| above eta1", n0);
  if (g != nullptr) {
    if (static_cast<int>(g->size()) != N + 1) throw Error("g trajectory has the wrong length");
    const double ng = sup_weighted(*g, m);
    if (ng > cfg.eta1 * (1.0 + 1e-12)) throw SolverError("smallness violated: |g| above eta1", ng);
  }

  F1Result res;
  Trajectory prev = start != nullptr ? *start : sys.zero_trajectory();
  if (static_cast<int>(prev.size()) != N + 1) throw Error("start trajectory has the wrong length");
  double last = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= cfg.max_inner_iters; ++l) {
    Trajectory next;
    next.times = prev.times;
    next.fields.reserve(N + 1);
    next.fields.push_back(f0);
    for (int n = 0; n < N; ++n) {
      const Field s = sys.stage(next.fields[n]);
      Field upd = s;
      sys.add_absorption(s, dt, upd);
      const bool use_prev = !cfg.disable_B2 || !cfg.disable_Q;
      if (use_prev) {
        const Field hl = sys.stage(prev.fields[n]);
        if (!cfg.disable_B2) sys.add_matrix(sys.split().B2(), hl, dt, upd);
        if (!cfg.disable_Q) {
          Field other = hl;
          if (g != nullptr) other.values() += 2.0 * sys.stage(g->fields[n]).values();
          sys.add_Q(hl, other, dt, upd);
        }
      }
      next.fields.push_back(sys.finish(upd));
      check_finite(next.fields.back(), "f1");
    }
    const double d = sup_weighted_distance(next, prev, m);
    const double scale = std::max(sup_weighted(next, m), std::numeric_limits<double>::min());
    res.distances.push_back(d);
    res.contraction = std::isfinite(last) && last > 0.0 ? d / last : 0.0;
    last = d;
    prev = std::move(next);
    res.iterations = l;
    if (d <= tol * scale) {
      res.trajectory = std::move(prev);
      return res;
    }
  }
  throw SolverError("smallness violated: Duhamel iteration not contracting", res.contraction);
}

F2Result solve_f2(const KineticSystem& sys, const Trajectory& g) {
  const SolverConfig& cfg = sys.config();
  const Eigen::VectorXd& m = sys.weight_samples();
  const int N = cfg.n_steps();
  const double dt = cfg.dt;
  if (static_cast<int>(g.size()) != N + 1) throw Error("g trajectory has the wrong length");
  const double ng = sup_weighted(g, m);
  if (ng > cfg.eta2 * (1.0 + 1e-12)) throw SolverError("smallness violated: |g| above eta2", ng);

  F2Result res;
  res.trajectory.times = g.times;
  res.trajectory.fields.reserve(N + 1);
  res.trajectory.fields.push_back(sys.zeros());
  for (int n = 0; n < N; ++n) {
    const Field s = sys.stage(res.trajectory.fields[n]);
    Field upd = s;
    sys.add_matrix(sys.L(), s, dt, upd);
    if (!cfg.disable_Q) sys.add_Q(s, s, dt, upd);
    sys.add_matrix(sys.split().A(), sys.stage(g.fields[n]), dt, upd);
    Field next = sys.finish(upd);
    Field sum = next;
    sum.values() += g.fields[n + 1].values();
    const FieldSplit pg = project_PiG(sum, cfg.bc);
    res.max_drift = std::max(res.max_drift, pg.coefficients.cwiseAbs().maxCoeff());
    next.values() -= pg.conserved.values();
    sum.values() -= pg.conserved.values();
    res.max_moment =
        std::max(res.max_moment, project_PiG(sum, cfg.bc).coefficients.cwiseAbs().maxCoeff());
    check_finite(next, "f2");
    res.trajectory.fields.push_back(std::move(next));
  }
  return res;
}

namespace {

Trajectory add(const Trajectory& a, const Trajectory& b) {
  Trajectory out = a;
  for (std::size_t n = 0; n < out.size(); ++n) out.fields[n].values() += b.fields[n].values();
  return out;
}

}  // namespace

CoupledResult solve_coupled(const KineticSystem& sys, const Field& f0, const CoupledOptions& opts) {
  const SolverConfig& cfg = sys.config();
  const Eigen::VectorXd& m = sys.weight_samples();
  const double n0 = sup_weighted(f0, m);
  if (n0 > cfg.eta0 * (1.0 + 1e-12)) throw SolverError("smallness violated: |f0| above eta0", n0);
  const double inner_tol = 0.1 * cfg.tol_fixed_point;

  CoupledResult res;
  res.f2 = sys.zero_trajectory();
  if (opts.f2_first) {
    // f1^{(0)}: the free absorbed semigroup of f0
    Trajectory f1 = sys.zero_trajectory();
    f1.fields[0] = f0;
    for (int n = 0; n < cfg.n_steps(); ++n) {
      const Field st = sys.stage(f1.fields[n]);
      Field upd = st;
      sys.add_absorption(st, cfg.dt, upd);
      f1.fields[n + 1] = sys.finish(upd);
    }
    res.f2 = solve_f2(sys, f1).trajectory;
    res.f1 = std::move(f1);
  }
  Trajectory f_prev;
  for (int l = 1; l <= cfg.max_outer_iters; ++l) {
    const Trajectory* start = opts.warm_start && !res.f1.fields.empty() ? &res.f1 : nullptr;
    F1Result r1 = solve_f1(sys, f0, &res.f2, start, inner_tol);
    res.inner_iterations.push_back(r1.iterations);
    res.inner_contraction.push_back(r1.contraction);
    res.f1 = std::move(r1.trajectory);
    F2Result r2 = solve_f2(sys, res.f1);
    res.max_moment = r2.max_moment;
    res.f2 = std::move(r2.trajectory);
    Trajectory f = add(res.f1, res.f2);
    res.outer_iterations = l;
    if (!f_prev.fields.empty()) {
      const double d = sup_weighted_distance(f, f_prev, m);
      const double scale = std::max(sup_weighted(f, m), std::numeric_limits<double>::min());
      res.outer_distances.push_back(d / scale);
      if (d <= cfg.tol_fixed_point * scale) {
        res.f = std::move(f);
        return res;
      }
    } else if (sup_weighted(f, m) == 0.0) {
      res.f = std::move(f);
      return res;
    }
    f_prev = std::move(f);
  }
  throw SolverError("coupling failed",
                    res.outer_distances.empty() ? 0.0 : res.outer_distances.back());
}

namespace {

Field full_step(const KineticSystem& sys, const Field& f, FullForm form) {
  const Field s = sys.stage(f);
  Field upd = s;
  if (form == FullForm::Perturbation) sys.add_matrix(sys.L(), s, sys.config().dt, upd);
  if (form == FullForm::Full || !sys.config().disable_Q) sys.add_Q(s, s, sys.config().dt, upd);
  return sys.finish(upd);
}

}  // namespace

FullResult solve_full(const KineticSystem& sys, const Field& init, FullForm form) {
  const SolverConfig& cfg = sys.config();
  const int N = cfg.n_steps();
  FullResult res;
  res.trajectory.times.reserve(N + 1);
  res.trajectory.fields.reserve(N + 1);
  res.trajectory.times.push_back(0.0);
  res.trajectory.fields.push_back(init);
  res.min_value = init.values().minCoeff();
  for (int n = 0; n < N; ++n) {
    Field next = full_step(sys, res.trajectory.fields[n], form);
    check_finite(next, "full");
    res.min_value = std::min(res.min_value, next.values().minCoeff());
    res.trajectory.times.push_back((n + 1) * cfg.dt);
    res.trajectory.fields.push_back(std::move(next));
  }
  if (form == FullForm::Full && res.min_value < -cfg.tol_pos) res.negativity_flag = true;
  return res;
}

double step_residual(const KineticSystem& sys, const Trajectory& f) {
  const Eigen::VectorXd& m = sys.weight_samples();
  double worst = 0.0, scale = 0.0;
  for (std::size_t n = 0; n + 1 < f.size(); ++n) {
    const Field pred = full_step(sys, f.fields[n], FullForm::Perturbation);
    worst = std::max(worst, ((f.fields[n + 1].values() - pred.values()).cwiseAbs() * m.asDiagonal())
                                .maxCoeff());
    scale = std::max(scale, sup_weighted(f.fields[n], m));
  }
  return scale > 0.0 ? worst / (sys.config().dt * scale) : 0.0;
}

DecayFit decay_fit(const std::vector<std::pair<double, double>>& series, double burn_in) {
  DecayFit fit;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : series) {
    if (t < burn_in) continue;
    if (!(v > 0.0) || !std::isfinite(v)) {
      fit.truncated = true;
      break;
    }
    pts.emplace_back(t, std::log(v));
  }
  fit.n_points = static_cast<int>(pts.size());
  if (pts.size() < 2) throw Error("decay fit needs at least two positive values");
  double st = 0.0, sy = 0.0;
  for (const auto& [t, y] : pts) {
    st += t;
    sy += y;
  }
  const double n = static_cast<double>(pts.size());
  const double tm = st / n, ym = sy / n;
  double stt = 0.0, sty = 0.0;
  for (const auto& [t, y] : pts) {
    stt += (t - tm) * (t - tm);
    sty += (t - tm) * (y - ym);
  }
  const double slope = stt > 0.0 ? sty / stt : 0.0;
  const double icept = ym - slope * tm;
  fit.lambda_hat = std::max(0.0, -slope);
  fit.C_hat = std::exp(icept);
  for (const auto& [t, y] : pts)
    fit.residual = std::max(fit.residual, std::abs(std::expm1(y - (icept + slope * t))));
  return fit;
}

std::vector<std::pair<double, double>> norm_series(const Trajectory& traj, const Eigen::VectorXd& m) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n)
    out.emplace_back(traj.times[n], sup_weighted(traj.fields[n], m));
  return out;
}

UniquenessReport uniqueness_probe(const KineticSystem& sys, const Field& f0, double scale,
                                  std::uint64_t seed, const CoupledResult* base_in) {
  const SolverConfig& cfg = sys.config();
  const Eigen::VectorXd& m = sys.weight_samples();
  const double n0 = sup_weighted(f0, m);
  if (n0 > cfg.eta0 * (1.0 + 1e-12)) throw SolverError("smallness violated: |f0| above eta0", n0);
  if (scale < 0.0) throw Error("perturbation scale must be non-negative");
  UniquenessReport rep;
  const double denom = n0 > 0.0 ? n0 : 1.0;

  CoupledResult own;
  if (base_in == nullptr) own = solve_coupled(sys, f0);
  const CoupledResult& base = base_in != nullptr ? *base_in : own;
  CoupledOptions other;
  other.f2_first = true;
  other.warm_start = false;
  const CoupledResult alt = solve_coupled(sys, f0, other);
  rep.restart_distance = sup_weighted_distance(base.f, alt.f, m) / denom;

  // noise with the conservation flags of f0: Pi_G component removed
  Field noise = f0.zeros_like();
  auto gen = stream_for(seed, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int a = 0; a < noise.n_velocities(); ++a)
    for (int k = 0; k < noise.n_cells(); ++k) noise(k, a) = u(gen) / m[a];
  noise = project_PiG(noise, cfg.bc).orthogonal;
  const double nn = sup_weighted(noise, m);
  rep.injected = scale * cfg.tol_fixed_point;
  if (nn > 0.0) noise.values() *= rep.injected * denom / nn;
  Field g0 = f0;
  g0.values() += noise.values();
  // keep the perturbed datum admissible
  const double ng = sup_weighted(g0, m);
  if (ng > cfg.eta0) g0.values() *= cfg.eta0 / ng;
  const CoupledResult pert = solve_coupled(sys, g0);
  rep.perturbed_distance = sup_weighted_distance(base.f, pert.f, m) / denom;

  rep.distance = std::max(rep.restart_distance, rep.perturbed_distance);
  rep.bound = std::max(10.0 * scale, 1.0) * cfg.tol_fixed_point;
  rep.pass = rep.distance <= rep.bound;
  return rep;
}

}  // namespace kinetic
