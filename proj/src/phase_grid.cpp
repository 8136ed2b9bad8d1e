#include "kinetic/phase_grid.hpp"

#include "kinetic/errors.hpp"

#include <cmath>
#include <limits>

namespace kinetic {

SpatialGrid::SpatialGrid(const Domain& domain, int n) : domain_(domain), n_(n) {
  if (n < 1) throw Error("spatial grid needs at least one cell");
  if (domain.kind() == DomainKind::Slab) {
    lo_ = Vec3::Zero();
    dx_ = Vec3(1.0 / n, 1.0, 1.0);
    lookup_.resize(n);
    for (int i = 0; i < n; ++i) {
      lookup_[i] = i;
      centers_.emplace_back((i + 0.5) / n, 0.0, 0.0);
      box_.push_back({i, 0, 0});
    }
    return;
  }
  const auto [lo, hi] = domain.bounding_box();
  lo_ = lo;
  dx_ = (hi - lo) / n;
  lookup_.assign(static_cast<std::size_t>(n) * n * n, -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const Vec3 c = lo_ + Vec3((i + 0.5) * dx_[0], (j + 0.5) * dx_[1], (l + 0.5) * dx_[2]);
        if (!domain.contains(c)) continue;
        lookup_[(static_cast<std::size_t>(i) * n + j) * n + l] = static_cast<int>(centers_.size());
        centers_.push_back(c);
        box_.push_back({i, j, l});
      }
  if (centers_.empty()) throw Error("spatial grid has no active cell");
}

int SpatialGrid::cell_at(int i, int j, int l) const {
  if (domain_.kind() == DomainKind::Slab) return (i >= 0 && i < n_) ? i : -1;
  if (i < 0 || j < 0 || l < 0 || i >= n_ || j >= n_ || l >= n_) return -1;
  return lookup_[(static_cast<std::size_t>(i) * n_ + j) * n_ + l];
}

int SpatialGrid::locate(const Vec3& x) const {
  if (domain_.kind() == DomainKind::Slab) {
    if (x[0] < 0.0 || x[0] > 1.0) return -1;
    return std::min(static_cast<int>(x[0] * n_), n_ - 1);
  }
  std::array<int, 3> m{};
  for (int d = 0; d < 3; ++d) {
    const double s = (x[d] - lo_[d]) / dx_[d];
    if (s < 0.0 || s > n_) return -1;
    m[d] = std::min(static_cast<int>(s), n_ - 1);
  }
  return cell_at(m[0], m[1], m[2]);
}

void SpatialGrid::box_weights(const Vec3& x, std::array<std::array<int, 3>, 8>& cells,
                              std::array<double, 8>& w) const {
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int d = 0; d < 3; ++d) {
    const double s = (x[d] - lo_[d]) / dx_[d] - 0.5;
    base[d] = static_cast<int>(std::floor(s));
    frac[d] = s - base[d];
  }
  int q = 0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dl = 0; dl < 2; ++dl, ++q) {
        cells[q] = {base[0] + di, base[1] + dj, base[2] + dl};
        w[q] = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
               (dl ? frac[2] : 1.0 - frac[2]);
      }
}

void SpatialGrid::interpolation(const Vec3& x, std::vector<std::pair<int, double>>& out) const {
  out.clear();
  if (domain_.kind() == DomainKind::Slab) {
    const double s = x[0] * n_ - 0.5;
    if (s <= 0.0) {
      out.emplace_back(0, 1.0);
    } else if (s >= n_ - 1) {
      out.emplace_back(n_ - 1, 1.0);
    } else {
      const int i = static_cast<int>(std::floor(s));
      const double t = s - i;
      out.emplace_back(i, 1.0 - t);
      out.emplace_back(i + 1, t);
    }
    return;
  }
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int d = 0; d < 3; ++d) {
    const double s = (x[d] - lo_[d]) / dx_[d] - 0.5;
    base[d] = static_cast<int>(std::floor(s));
    frac[d] = s - base[d];
  }
  double total = 0.0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dl = 0; dl < 2; ++dl) {
        const int k = cell_at(base[0] + di, base[1] + dj, base[2] + dl);
        if (k < 0) continue;
        const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                         (dl ? frac[2] : 1.0 - frac[2]);
        if (w <= 0.0) continue;
        out.emplace_back(k, w);
        total += w;
      }
  if (total > 0.0) {
    for (auto& p : out) p.second /= total;
    return;
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    const double d = (centers_[k] - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  out.emplace_back(best, 1.0);
}

Field::Field(std::shared_ptr<const SpatialGrid> space, std::shared_ptr<const VelocityGrid> velocity)
    : space_(std::move(space)),
      velocity_(std::move(velocity)),
      values_(Eigen::MatrixXd::Zero(space_->size(), velocity_->size())) {}

Field Field::zeros_like() const { return Field(space_, velocity_); }

double Field::moment(const Eigen::VectorXd& psi) const {
  return space_->cell_volume() * velocity_->weight() * (values_ * psi).sum();
}

double Field::mass() const { return moment(Eigen::VectorXd::Ones(n_velocities())); }

double Field::energy() const {
  Eigen::VectorXd e(n_velocities());
  for (int a = 0; a < n_velocities(); ++a) e[a] = velocity_->node(a).squaredNorm();
  return moment(e);
}

Vec3 Field::momentum() const {
  Vec3 p;
  for (int d = 0; d < 3; ++d) {
    Eigen::VectorXd e(n_velocities());
    for (int a = 0; a < n_velocities(); ++a) e[a] = velocity_->node(a)[d];
    p[d] = moment(e);
  }
  return p;
}

double Field::interpolate(const Vec3& x, const Vec3& v) const {
  std::array<int, 8> vi{};
  std::array<double, 8> vw{};
  if (!velocity_->trilinear(v, vi, vw)) return 0.0;
  std::vector<std::pair<int, double>> xs;
  space_->interpolation(x, xs);
  double acc = 0.0;
  for (const auto& [k, wx] : xs)
    for (int m = 0; m < 8; ++m) acc += wx * vw[m] * values_(k, vi[m]);
  return acc;
}

}  // namespace kinetic
