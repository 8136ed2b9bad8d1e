#include "kinetic/transport.hpp"

#include "kinetic/errors.hpp"
#include "kinetic/parallel.hpp"
#include "kinetic/rng.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace kinetic {

WallMeasure::WallMeasure(int n_normal, int n_tangential) {
  if (n_normal < 1 || n_tangential < 1) throw Error("wall quadrature sizes must be positive");
  // c_mu^{-1} = int_{v.n > 0} mu (v.n) dv = (2 pi)^{-1/2} int_0^inf s e^{-s^2/2} ds
  const Rule1D r = gauss_legendre(64, 0.0, 12.0);
  double flux = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double s = r.nodes[i];
    flux += r.weights[i] * s * std::exp(-0.5 * s * s);
  }
  c_mu_ = std::sqrt(2.0 * std::numbers::pi) / flux;
  normal_ = gauss_laguerre(n_normal);
  for (double& e : normal_.nodes) e = std::sqrt(2.0 * e);
  tangential_ = gauss_hermite_normal(n_tangential);
}

double WallMeasure::quadrature_mass() const {
  double acc = 0.0;
  for (double wn : normal_.weights)
    for (double w1 : tangential_.weights)
      for (double w2 : tangential_.weights) acc += wn * w1 * w2;
  // the rule integrates the normalized density; rescale by the computed c_mu
  return acc * c_mu_ / std::sqrt(2.0 * std::numbers::pi);
}

std::vector<WallMeasure::Node> WallMeasure::quadrature(const Vec3& n) const {
  const auto [t1, t2] = tangent_frame(n);
  const double scale = c_mu_ / std::sqrt(2.0 * std::numbers::pi);
  std::vector<Node> out;
  out.reserve(normal_.nodes.size() * tangential_.nodes.size() * tangential_.nodes.size());
  for (std::size_t i = 0; i < normal_.nodes.size(); ++i)
    for (std::size_t j = 0; j < tangential_.nodes.size(); ++j)
      for (std::size_t k = 0; k < tangential_.nodes.size(); ++k)
        out.push_back({normal_.nodes[i] * n + tangential_.nodes[j] * t1 + tangential_.nodes[k] * t2,
                       scale * normal_.weights[i] * tangential_.weights[j] * tangential_.weights[k]});
  return out;
}

Vec3 WallMeasure::sample(const Vec3& n, std::mt19937_64& gen) const {
  const auto [t1, t2] = tangent_frame(n);
  std::normal_distribution<double> normal;
  std::exponential_distribution<double> expo(1.0);
  const double z1 = normal(gen), z2 = normal(gen);
  double e = expo(gen);
  while (e <= 0.0) e = expo(gen);
  return std::sqrt(2.0 * e) * n + z1 * t1 + z2 * t2;
}

std::pair<Vec3, Vec3> tangent_frame(const Vec3& n) {
  int axis = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(n[d]) < std::abs(n[axis])) axis = d;
  Vec3 e = Vec3::Zero();
  e[axis] = 1.0;
  const Vec3 t1 = (e - e.dot(n) * n).normalized();
  return {t1, n.cross(t1)};
}

double nu_floor(const CollisionModel& model) {
  double m = model.nu_speed(0.0);
  for (int i = 1; i <= 2000; ++i) m = std::min(m, model.nu_speed(0.01 * i));
  return m;
}

double semigroup_specular(const Domain& domain, const CollisionModel& model,
                          const PhaseFunction& f0, double t, const Vec3& x, const Vec3& v,
                          const TraceOptions& opts) {
  if (t == 0.0) return f0(x, v);
  const ReboundChain chain = trace_specular(domain, t, x, v, opts);
  const auto& end = std::get<ReachedInitialPlane>(chain.terminal);
  return std::exp(-model.nu(v) * t) * f0(end.x, end.v);
}

ReboundChain sample_diffusive_chain(const Domain& domain, const WallMeasure& wall, double t,
                                    const Vec3& x, const Vec3& v, std::mt19937_64& gen,
                                    int p_max) {
  if (p_max < 1) throw Error("p_max must be at least 1");
  ReboundChain chain;
  chain.origin = {t, x, v};
  chain.kind = ChainKind::Diffusive;
  if (t <= 0.0 || v.squaredNorm() == 0.0) {
    chain.terminal = ReachedInitialPlane{x, v};
    return chain;
  }
  const auto cls = classify_phase_point(domain, x, v);
  if (const auto* bp = std::get_if<BoundaryPhasePoint>(&cls);
      bp != nullptr && bp->cls == BoundaryClass::Grazing)
    throw GeometryError("grazing phase point");

  double remaining = t;
  Vec3 cx = x, cv = v;
  while (true) {
    const ExitResult ex = backward_exit_time(domain, cx, cv);
    if (!(ex.t_b < remaining)) {
      chain.terminal = ReachedInitialPlane{cx - remaining * cv, cv};
      return chain;
    }
    remaining -= ex.t_b;
    cx = domain.project_to_boundary(ex.x_b);
    const Vec3 n = domain.xi(cx).gradient.normalized();
    cv = wall.sample(n, gen);
    chain.hits.push_back({remaining, cx, cv});
    if (static_cast<int>(chain.hits.size()) >= p_max) {
      chain.terminal = ActiveChain{remaining, cx, cv};
      return chain;
    }
  }
}

namespace {

/// Series payload of one chain; active chains return 0.
double chain_payload(const ReboundChain& chain, const CollisionModel& model,
                     const PhaseFunction& f0) {
  const auto* end = std::get_if<ReachedInitialPlane>(&chain.terminal);
  if (end == nullptr) return 0.0;
  const PhasePoint& o = chain.origin;
  if (chain.hits.empty()) return std::exp(-model.nu(o.v) * o.t) * f0(end->x, end->v);
  // exponential factors e^{-nu(v_j)(t_j - t_{j+1})} along the chain, t_{p+1} = 0
  double exponent = model.nu(o.v) * (o.t - chain.hits.front().t);
  for (std::size_t j = 0; j < chain.hits.size(); ++j) {
    const double next = j + 1 < chain.hits.size() ? chain.hits[j + 1].t : 0.0;
    exponent += model.nu(chain.hits[j].v) * (chain.hits[j].t - next);
  }
  // the wall re-emission density is mu-weighted: the importance ratio
  // f0 / mu on the last leg carries the Maxwellian of the outgoing velocity
  const double mu_last = maxwellian(end->v);
  return std::exp(-exponent) * maxwellian(o.v) * f0(end->x, end->v) / mu_last;
}

}  // namespace

DiffusiveEstimate semigroup_diffusive(const Domain& domain, const CollisionModel& model,
                                      const WallMeasure& wall, const PhaseFunction& f0, double t,
                                      const Vec3& x, const Vec3& v, int n_chains, int p_max,
                                      std::uint64_t seed, double f0_over_mu_sup) {
  if (n_chains < 1) throw Error("n_chains must be at least 1");
  // zero-rebound first flight: the estimator is deterministic
  {
    auto gen = stream_for(seed, 0);
    const ReboundChain first = sample_diffusive_chain(domain, wall, t, x, v, gen, p_max);
    if (first.hits.empty()) {
      DiffusiveEstimate d;
      d.estimate = chain_payload(first, model, f0);
      return d;
    }
  }
  std::vector<double> payload(n_chains);
  std::vector<char> is_active(n_chains);
  parallel_for(n_chains, [&](int i) {
    auto gen = stream_for(seed, static_cast<std::uint64_t>(i));
    const ReboundChain chain = sample_diffusive_chain(domain, wall, t, x, v, gen, p_max);
    is_active[i] = !chain.reached_initial_plane();
    payload[i] = chain_payload(chain, model, f0);
  });
  double sum = 0.0, sum_sq = 0.0;
  int active = 0;
  for (int i = 0; i < n_chains; ++i) {
    sum += payload[i];
    sum_sq += payload[i] * payload[i];
    active += is_active[i];
  }
  DiffusiveEstimate est;
  const double n = n_chains;
  est.estimate = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * est.estimate * est.estimate) / (n - 1)) : 0.0;
  est.stderr_ = std::sqrt(var / n);
  est.active_fraction = active / n;
  est.truncation_bound = f0_over_mu_sup * maxwellian(v) * est.active_fraction;
  return est;
}

EscapeEstimate escape_probability(const Domain& domain, const WallMeasure& wall, double t,
                                  const Vec3& x, const Vec3& v, int p, int n_chains,
                                  std::uint64_t seed) {
  if (p < 1) throw Error("p must be at least 1");
  if (n_chains < 1) throw Error("n_chains must be at least 1");
  std::vector<char> is_active(n_chains);
  parallel_for(n_chains, [&](int i) {
    auto gen = stream_for(seed, static_cast<std::uint64_t>(i));
    is_active[i] = !sample_diffusive_chain(domain, wall, t, x, v, gen, p).reached_initial_plane();
  });
  int active = 0;
  for (char c : is_active) active += c;
  EscapeEstimate e;
  e.value = static_cast<double>(active) / n_chains;
  e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / n_chains);
  return e;
}

std::vector<EscapeEstimate> escape_profile(const Domain& domain, const WallMeasure& wall,
                                           double t, const Vec3& x, const Vec3& v,
                                           const std::vector<int>& p_values, int n_chains,
                                           std::uint64_t seed) {
  if (p_values.empty()) return {};
  if (n_chains < 1) throw Error("n_chains must be at least 1");
  const int p_max = *std::max_element(p_values.begin(), p_values.end());
  if (*std::min_element(p_values.begin(), p_values.end()) < 1) throw Error("p must be at least 1");
  std::vector<int> hits(n_chains);
  parallel_for(n_chains, [&](int i) {
    auto gen = stream_for(seed, static_cast<std::uint64_t>(i));
    hits[i] = static_cast<int>(sample_diffusive_chain(domain, wall, t, x, v, gen, p_max).rebounds());
  });
  std::vector<EscapeEstimate> out;
  for (int p : p_values) {
    int active = 0;
    for (int h : hits) active += h >= p;
    EscapeEstimate e;
    e.value = static_cast<double>(active) / n_chains;
    e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / n_chains);
    out.push_back(e);
  }
  return out;
}

TransportStep::TransportStep(std::shared_ptr<const SpatialGrid> space,
                             std::shared_ptr<const VelocityGrid> velocity, BoundaryCondition bc,
                             double dt, Eigen::VectorXd nu)
    : space_(std::move(space)), velocity_(std::move(velocity)), bc_(bc), dt_(dt), nu_(std::move(nu)) {
  if (!(dt > 0.0)) throw Error("dt must be positive");
  if (nu_.size() == 0) nu_ = Eigen::VectorXd::Zero(velocity_->size());
  if (nu_.size() != velocity_->size()) throw Error("nu size does not match velocity grid");
  const auto [lo, hi] = space_->domain().bounding_box();
  const double width = space_->domain().kind() == DomainKind::Slab ? 1.0 : (hi - lo).maxCoeff();
  const double vmax = std::sqrt(3.0) * velocity_->v_max();
  if (dt * vmax > width) cfl_warning_ = true;
  if (space_->domain().kind() != DomainKind::Slab) build_box();
}

Field TransportStep::apply(const Field& in) const {
  Field out = in.zeros_like();
  apply(in, out);
  return out;
}

void TransportStep::apply(const Field& in, Field& out) const {
  if (&in.space() != space_.get() || &in.velocity() != velocity_.get())
    throw Error("field is not on the transport grid");
  out.values().setZero(in.n_cells(), in.n_velocities());
  if (space_->domain().kind() == DomainKind::Slab)
    apply_slab(in, out);
  else
    apply_box(in, out);
}

namespace {

/// Overlap length of [a0, a1] and [b0, b1].
double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

/// Deposit `mass` (in units of f * dx) uniformly over the strip of width L
/// next to a wall (x1 = 0 if `left`).
void deposit_strip(double* col, int n, double mass, double L, bool left) {
  const double dx = 1.0 / n;
  L = std::min(L, 1.0);
  for (int c = 0; c < n; ++c) {
    const double len = overlap(c * dx, (c + 1) * dx, 0.0, L);
    if (len <= 0.0) break;
    col[left ? c : n - 1 - c] += mass * (len / L) / dx;
  }
}

}  // namespace

void TransportStep::apply_slab(const Field& in, Field& out) const {
  const VelocityGrid& vg = *velocity_;
  const int n = space_->n();
  const double dx = 1.0 / n;
  const Eigen::MatrixXd& F = in.values();
  Eigen::MatrixXd& G = out.values();
  const Eigen::VectorXd& mu = vg.mu();

  if (bc_ == BoundaryCondition::Specular) {
    std::vector<double> g(2 * n), h(2 * n);
    for (int a = 0; a < vg.size(); ++a) {
      const double v1 = vg.node(a)[0];
      if (v1 <= 0.0) continue;
      const int ra = vg.reflect(a, 0);
      for (int j = 0; j < n; ++j) {
        g[j] = F(j, a);
        g[n + j] = F(n - 1 - j, ra);
      }
      // shift right on the circle of 2n cells by s = v1 dt / dx cells
      double s = std::fmod(v1 * dt_ / dx, 2.0 * n);
      const int si = static_cast<int>(std::floor(s));
      const double phi = s - si;
      for (int j = 0; j < 2 * n; ++j) {
        const int i0 = ((j - si) % (2 * n) + 2 * n) % (2 * n);
        const int i1 = (i0 - 1 + 2 * n) % (2 * n);
        h[j] = (1.0 - phi) * g[i0] + phi * g[i1];
      }
      const double da = std::exp(-nu_[a] * dt_), dr = std::exp(-nu_[ra] * dt_);
      for (int j = 0; j < n; ++j) {
        G(j, a) = da * h[j];
        G(n - 1 - j, ra) = dr * h[n + j];
      }
    }
    return;
  }

  // diffuse walls: pools[0] at x1 = 0, pools[1] at x1 = 1 (units of f * dx)
  double pools[2] = {0.0, 0.0};
  std::vector<double> col(n);
  for (int a = 0; a < vg.size(); ++a) {
    const double v1 = vg.node(a)[0];
    const bool right = v1 > 0.0;
    const double s = std::abs(v1) * dt_ / dx;
    const int si = static_cast<int>(std::floor(s));
    const double phi = s - si;
    double before = 0.0, after = 0.0;
    for (int j = 0; j < n; ++j) {
      // upstream cells in the direction of motion
      const int i0 = right ? j - si : j + si;
      const int i1 = right ? i0 - 1 : i0 + 1;
      const double f0 = (i0 >= 0 && i0 < n) ? F(i0, a) : 0.0;
      const double f1 = (i1 >= 0 && i1 < n) ? F(i1, a) : 0.0;
      col[j] = (1.0 - phi) * f0 + phi * f1;
      before += F(j, a);
      after += col[j];
    }
    const double decay = std::exp(-nu_[a] * dt_);
    for (int j = 0; j < n; ++j) G(j, a) = decay * col[j];
    pools[right ? 1 : 0] += (before - after) * dx * std::exp(-0.5 * nu_[a] * dt_);
  }
  // re-emission with the discrete flux profile mu |v1| over inward nodes
  for (int wall = 0; wall < 2; ++wall) {
    if (pools[wall] == 0.0) continue;
    const bool left = wall == 0;
    double norm = 0.0;
    for (int a = 0; a < vg.size(); ++a) {
      const double v1 = vg.node(a)[0];
      if ((left && v1 > 0.0) || (!left && v1 < 0.0)) norm += mu[a] * std::abs(v1);
    }
    for (int a = 0; a < vg.size(); ++a) {
      const double v1 = vg.node(a)[0];
      if (!((left && v1 > 0.0) || (!left && v1 < 0.0))) continue;
      const double p = mu[a] * std::abs(v1) / norm;
      deposit_strip(G.col(a).data(), n, pools[wall] * p * std::exp(-0.5 * nu_[a] * dt_),
                    std::abs(v1) * dt_, left);
    }
  }
}

void TransportStep::build_box() {
  const SpatialGrid& sg = *space_;
  const VelocityGrid& vg = *velocity_;
  const Domain& dom = sg.domain();
  const int nv = vg.size();
  parcels_.resize(static_cast<std::size_t>(sg.size()) * nv);
  std::vector<std::pair<int, double>> tmp;
  std::vector<int> pool_of_cell(sg.size(), -1);

  auto nearest_cell = [&](const Vec3& y) {
    int k = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < sg.size(); ++c) {
      const double d = (sg.center(c) - y).squaredNorm();
      if (d < best) {
        best = d;
        k = c;
      }
    }
    return k;
  };

  auto pool_for = [&](const Vec3& wall_point) {
    const int k = nearest_cell(wall_point);
    if (pool_of_cell[k] >= 0) return pool_of_cell[k];
    pool_of_cell[k] = static_cast<int>(pools_.size());
    pools_.emplace_back();
    Pool& pool = pools_.back();
    const Vec3 xw = dom.nearest_boundary_point(sg.center(k));
    const Vec3 nw = dom.xi(xw).gradient.normalized();
    double norm = 0.0;
    for (int a = 0; a < nv; ++a) {
      const double dn = vg.node(a).dot(nw);
      if (dn < 0.0) {
        pool.nodes.push_back(a);
        pool.probability.push_back(vg.mu()[a] * -dn);
        norm += vg.mu()[a] * -dn;
      }
    }
    pool.offsets.push_back(0);
    const Vec3 inside = xw - 1e-9 * nw;
    for (std::size_t i = 0; i < pool.nodes.size(); ++i) {
      pool.probability[i] /= norm;
      const Vec3 v = vg.node(pool.nodes[i]);
      // emitted at a uniform time within the step: mean flight dt / 2, capped
      // well before the far wall
      const double t_far = backward_exit_time(dom, inside, -v).t_b;
      sg.interpolation(inside + std::min(0.5 * dt_, 0.5 * t_far) * v, tmp);
      pool.x_targets.insert(pool.x_targets.end(), tmp.begin(), tmp.end());
      pool.offsets.push_back(static_cast<std::uint32_t>(pool.x_targets.size()));
    }
    return pool_of_cell[k];
  };

  auto push_velocity = [&](int a, const Vec3& V) {
    if ((V - vg.node(a)).squaredNorm() == 0.0) {
      v_targets_.emplace_back(a, 1.0);
    } else if (vg.conservative_stencil(V, tmp)) {
      v_targets_.insert(v_targets_.end(), tmp.begin(), tmp.end());
    } else {
      v_targets_.emplace_back(vg.nearest_symmetric_image(a, V), 1.0);
    }
  };

  std::array<std::array<int, 3>, 8> cells;
  std::array<double, 8> w;
  for (int k = 0; k < sg.size(); ++k) {
    const Vec3 x = sg.center(k);
    for (int a = 0; a < nv; ++a) {
      Parcel& p = parcels_[static_cast<std::size_t>(k) * nv + a];
      const Vec3 v = vg.node(a);
      Vec3 X, V;
      if (bc_ == BoundaryCondition::Specular) {
        std::tie(X, V) = flow_specular(dom, dt_, x, v);
      } else {
        X = x + dt_ * v;
        V = v;
      }
      p.piece_begin = static_cast<std::uint32_t>(pieces_.size());
      p.pool_begin = static_cast<std::uint32_t>(pool_targets_.size());
      sg.box_weights(X, cells, w);

      Piece direct{};
      direct.x_begin = static_cast<std::uint32_t>(x_targets_.size());
      for (int q = 0; q < 8; ++q) {
        if (w[q] <= 0.0) continue;
        const int c = sg.cell_at(cells[q][0], cells[q][1], cells[q][2]);
        if (c >= 0) x_targets_.emplace_back(c, w[q]);
      }
      direct.x_end = static_cast<std::uint32_t>(x_targets_.size());
      if (direct.x_end > direct.x_begin) {
        direct.v_begin = static_cast<std::uint32_t>(v_targets_.size());
        push_velocity(a, V);
        direct.v_end = static_cast<std::uint32_t>(v_targets_.size());
        pieces_.push_back(direct);
      }

      for (int q = 0; q < 8; ++q) {
        if (w[q] <= 0.0) continue;
        if (sg.cell_at(cells[q][0], cells[q][1], cells[q][2]) >= 0) continue;
        const Vec3 y = sg.box_center(cells[q][0], cells[q][1], cells[q][2]);
        const Vec3 xw = dom.nearest_boundary_point(y);
        if (bc_ == BoundaryCondition::Diffuse) {
          pool_targets_.emplace_back(pool_for(xw), w[q]);
          continue;
        }
        const Vec3 n = dom.xi(xw).gradient.normalized();
        const Vec3 mirrored = y - 2.0 * (y - xw).dot(n) * n;
        Piece ghost{};
        ghost.x_begin = static_cast<std::uint32_t>(x_targets_.size());
        sg.interpolation(mirrored, tmp);
        for (const auto& [c, wc] : tmp) x_targets_.emplace_back(c, w[q] * wc);
        ghost.x_end = static_cast<std::uint32_t>(x_targets_.size());
        ghost.v_begin = static_cast<std::uint32_t>(v_targets_.size());
        push_velocity(a, specular_reflect(n, V));
        ghost.v_end = static_cast<std::uint32_t>(v_targets_.size());
        pieces_.push_back(ghost);
      }
      p.piece_end = static_cast<std::uint32_t>(pieces_.size());
      p.pool_end = static_cast<std::uint32_t>(pool_targets_.size());
    }
  }
}

void TransportStep::apply_box(const Field& in, Field& out) const {
  const int nv = velocity_->size();
  const int nc = space_->size();
  const Eigen::MatrixXd& F = in.values();
  Eigen::MatrixXd& G = out.values();
  std::vector<double> pool_mass(pools_.size(), 0.0);
  for (int a = 0; a < nv; ++a) {
    const double decay = std::exp(-nu_[a] * dt_);
    const double half = std::exp(-0.5 * nu_[a] * dt_);
    for (int k = 0; k < nc; ++k) {
      const double val = F(k, a);
      if (val == 0.0) continue;
      const Parcel& p = parcels_[static_cast<std::size_t>(k) * nv + a];
      for (std::uint32_t i = p.pool_begin; i < p.pool_end; ++i)
        pool_mass[pool_targets_[i].first] += half * val * pool_targets_[i].second;
      const double dv = decay * val;
      for (std::uint32_t q = p.piece_begin; q < p.piece_end; ++q) {
        const Piece& pc = pieces_[q];
        for (std::uint32_t i = pc.x_begin; i < pc.x_end; ++i) {
          const auto [kx, wx] = x_targets_[i];
          for (std::uint32_t j = pc.v_begin; j < pc.v_end; ++j) {
            const auto [av, wv] = v_targets_[j];
            G(kx, av) += dv * wx * wv;
          }
        }
      }
    }
  }
  for (std::size_t q = 0; q < pools_.size(); ++q) {
    if (pool_mass[q] == 0.0) continue;
    const Pool& pool = pools_[q];
    for (std::size_t i = 0; i < pool.nodes.size(); ++i) {
      const int a = pool.nodes[i];
      const double m = pool_mass[q] * pool.probability[i] * std::exp(-0.5 * nu_[a] * dt_);
      for (std::uint32_t j = pool.offsets[i]; j < pool.offsets[i + 1]; ++j)
        G(pool.x_targets[j].first, a) += m * pool.x_targets[j].second;
    }
  }
}

Field step_transport(const Field& f, double dt, BoundaryCondition bc, const Eigen::VectorXd& nu) {
  const TransportStep step(f.space_ptr(), f.velocity_ptr(), bc, dt, nu);
  return step.apply(f);
}

}  // namespace kinetic
