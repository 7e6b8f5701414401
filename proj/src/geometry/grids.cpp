#include "qmalab/geometry.hpp"

#include <cmath>

namespace qmalab::geometry {

TorusGrid::TorusGrid(int m, int res, double period) : m_(m), res_(res), period_(period) {
  if (m < 1) throw InvalidArgument("torus grid: m must be >= 1");
  if (res < 4 || res % 2 != 0) throw InvalidArgument("torus grid: res must be even and >= 4");
  if (!(period > 0.0)) throw InvalidArgument("torus grid: period must be positive");
  node_count_ = 1;
  for (int a = 0; a < real_dim(); ++a) node_count_ *= static_cast<std::size_t>(res);
}

double TorusGrid::volume() const { return std::pow(period_, real_dim()); }

double TorusGrid::cell_volume() const { return std::pow(spacing(), real_dim()); }

void TorusGrid::multi_index(std::size_t node, std::span<int> out) const {
  for (int a = real_dim() - 1; a >= 0; --a) {
    out[a] = static_cast<int>(node % res_);
    node /= res_;
  }
}

std::size_t TorusGrid::node_index(std::span<const int> idx) const {
  std::size_t node = 0;
  for (int a = 0; a < real_dim(); ++a) {
    int q = idx[a] % res_;
    if (q < 0) q += res_;
    node = node * res_ + static_cast<std::size_t>(q);
  }
  return node;
}

Point TorusGrid::coordinates(std::size_t node) const {
  std::vector<int> idx(real_dim());
  multi_index(node, idx);
  Point x(real_dim());
  for (int a = 0; a < real_dim(); ++a) x[a] = idx[a] * spacing();
  return x;
}

BallGrid::BallGrid(int n, Point center, double radius, double spacing)
    : n_(n), center_(std::move(center)), radius_(radius), spacing_(spacing) {
  if (n < 1) throw InvalidArgument("ball grid: n must be >= 1");
  if (static_cast<int>(center_.size()) != 2 * n) throw InvalidArgument("ball grid: center has wrong dimension");
  if (!(radius > 0.0) || !(spacing > 0.0)) throw InvalidArgument("ball grid: radius and spacing must be positive");
  half_ = static_cast<int>(std::floor(radius / spacing + 1e-9));
  if (half_ < 2) throw InvalidArgument("ball grid: fewer than two nodes per radius");

  const int dim = real_dim();
  const int side = points_per_dim();
  std::size_t count = 1;
  for (int a = 0; a < dim; ++a) count *= static_cast<std::size_t>(side);

  const double r2 = (radius / spacing) * (radius / spacing) * (1.0 + 1e-12);
  auto inside = [&](std::span<const int> off) {
    double d2 = 0.0;
    for (int a = 0; a < dim; ++a) d2 += double(off[a]) * off[a];
    return d2 <= r2;
  };

  kinds_.assign(count, NodeKind::exterior);
  std::vector<int> off(dim);
  // Pass 1: interior = closed-ball nodes whose axis neighbours are all in the closed ball.
  for (std::size_t node = 0; node < count; ++node) {
    offsets(node, off);
    if (!inside(off)) continue;
    bool all = true;
    for (int a = 0; a < dim && all; ++a) {
      for (int step : {-1, 1}) {
        off[a] += step;
        all = all && inside(off);
        off[a] -= step;
      }
    }
    if (all) kinds_[node] = NodeKind::interior;
  }
  // Pass 2: boundary = non-interior axis neighbours of interior nodes.
  for (std::size_t node = 0; node < count; ++node) {
    if (kinds_[node] != NodeKind::interior) continue;
    offsets(node, off);
    for (int a = 0; a < dim; ++a) {
      for (int step : {-1, 1}) {
        off[a] += step;
        if (auto nb = node_at(off); nb && kinds_[*nb] == NodeKind::exterior) {
          kinds_[*nb] = NodeKind::boundary;
        }
        off[a] -= step;
      }
    }
  }
}

double BallGrid::cell_volume() const { return std::pow(spacing_, real_dim()); }

std::size_t BallGrid::count(NodeKind k) const {
  std::size_t c = 0;
  for (auto kind : kinds_) c += (kind == k);
  return c;
}

void BallGrid::offsets(std::size_t node, std::span<int> out) const {
  const int side = points_per_dim();
  for (int a = real_dim() - 1; a >= 0; --a) {
    out[a] = static_cast<int>(node % side) - half_;
    node /= side;
  }
}

std::optional<std::size_t> BallGrid::node_at(std::span<const int> off) const {
  const int side = points_per_dim();
  std::size_t node = 0;
  for (int a = 0; a < real_dim(); ++a) {
    const int q = off[a] + half_;
    if (q < 0 || q >= side) return std::nullopt;
    node = node * side + static_cast<std::size_t>(q);
  }
  return node;
}

Point BallGrid::coordinates(std::size_t node) const {
  std::vector<int> off(real_dim());
  offsets(node, off);
  Point x(real_dim());
  for (int a = 0; a < real_dim(); ++a) x[a] = center_[a] + off[a] * spacing_;
  return x;
}

double BallGrid::distance2(std::size_t node) const {
  std::vector<int> off(real_dim());
  offsets(node, off);
  double d2 = 0.0;
  for (int o : off) d2 += double(o) * o;
  return d2 * spacing_ * spacing_;
}

bool same_grid(const GridHandle& a, const GridHandle& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& ga) {
        using T = std::decay_t<decltype(ga)>;
        return ga.get() == std::get<T>(b).get();
      },
      a);
}

std::size_t node_count(const GridHandle& grid) {
  return std::visit([](const auto& g) { return g->node_count(); }, grid);
}

int complex_dim(const GridHandle& grid) {
  return std::visit([](const auto& g) { return g->n(); }, grid);
}

}  // namespace qmalab::geometry
