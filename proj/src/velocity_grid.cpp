#include "kinetic/velocity_grid.hpp"

#include "kinetic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kinetic {

namespace {
const double kMuNorm = std::pow(2.0 * std::numbers::pi, -1.5);
}

double maxwellian(double speed_sq) { return kMuNorm * std::exp(-0.5 * speed_sq); }
double maxwellian(const Vec3& v) { return maxwellian(v.squaredNorm()); }

VelocityGrid::VelocityGrid(int n_per_axis, double v_max)
    : n_(n_per_axis), v_max_(v_max), h_(2.0 * v_max / n_per_axis) {
  if (n_ < 2) throw Error("velocity grid needs at least two nodes per axis");
  if (n_ > 64) throw Error("velocity grid larger than 64 per axis is not supported");
  if (!(v_max > 0.0)) throw Error("velocity truncation must be positive");
  nodes_.reserve(size());
  mu_.resize(size());
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        const Vec3 v((i + 0.5) * h_ - v_max_, (j + 0.5) * h_ - v_max_, (k + 0.5) * h_ - v_max_);
        mu_[static_cast<int>(nodes_.size())] = maxwellian(v);
        nodes_.push_back(v);
      }
}

int VelocityGrid::reflect(int a, int axis) const {
  auto m = multi_index(a);
  m[axis] = n_ - 1 - m[axis];
  return index(m[0], m[1], m[2]);
}

int VelocityGrid::negate(int a) const {
  const auto m = multi_index(a);
  return index(n_ - 1 - m[0], n_ - 1 - m[1], n_ - 1 - m[2]);
}

bool VelocityGrid::on_edge(int a) const {
  for (int c : multi_index(a))
    if (c == 0 || c == n_ - 1) return true;
  return false;
}

bool VelocityGrid::trilinear(const Vec3& v, std::array<int, 8>& idx,
                             std::array<double, 8>& w) const {
  std::array<int, 3> lo{};
  std::array<double, 3> frac{};
  for (int d = 0; d < 3; ++d) {
    const double s = (v[d] + v_max_) / h_ - 0.5;
    if (s < 0.0 || s > n_ - 1) return false;
    int l = static_cast<int>(std::floor(s));
    if (l >= n_ - 1) l = n_ - 2;
    lo[d] = l;
    frac[d] = s - l;
  }
  int m = 0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        idx[m] = index(lo[0] + di, lo[1] + dj, lo[2] + dk);
        w[m] = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
               (dk ? frac[2] : 1.0 - frac[2]);
        ++m;
      }
  return true;
}

bool VelocityGrid::conservative_stencil(const Vec3& v,
                                        std::vector<std::pair<int, double>>& out) const {
  out.clear();
  std::array<std::array<int, 3>, 3> nodes{};
  std::array<std::array<double, 3>, 3> wts{};
  for (int d = 0; d < 3; ++d) {
    const double s = (v[d] + v_max_) / h_ - 0.5;
    if (s < 0.0 || s > n_ - 1) return false;
    int c = static_cast<int>(std::lround(s));
    c = std::clamp(c, 1, n_ - 2);
    const double x = s - c;  // offset from the stencil centre in units of h
    nodes[d] = {c - 1, c, c + 1};
    wts[d] = {0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)};
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        const double w = wts[0][a] * wts[1][b] * wts[2][c];
        if (w != 0.0) out.emplace_back(index(nodes[0][a], nodes[1][b], nodes[2][c]), w);
      }
  return true;
}

int VelocityGrid::nearest_symmetric_image(int a, const Vec3& v) const {
  const auto m = multi_index(a);
  std::array<int, 3> perm{0, 1, 2};
  int best = a;
  double best_dot = -std::numeric_limits<double>::infinity();
  do {
    for (int flips = 0; flips < 8; ++flips) {
      std::array<int, 3> c{};
      for (int d = 0; d < 3; ++d) {
        c[d] = m[perm[d]];
        if (flips & (1 << d)) c[d] = n_ - 1 - c[d];
      }
      const int b = index(c[0], c[1], c[2]);
      const double dot = nodes_[b].dot(v);
      if (dot > best_dot) {
        best_dot = dot;
        best = b;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace kinetic
