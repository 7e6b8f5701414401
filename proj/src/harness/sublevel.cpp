#include "qmalab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmalab::harness {

using geometry::NodeKind;

SublevelProblem::SublevelProblem(ScalarField psi, ScalarField F, double c0)
    : psi_(std::move(psi)), F_(std::move(F)), c0_(c0) {
  if (psi_.on_torus()) throw InvalidArgument("SublevelProblem: psi must live on a ball grid");
  if (!geometry::same_grid(psi_.grid(), F_.grid())) throw InvalidArgument("SublevelProblem: grid mismatch");
  if (!(c0 > 0.0)) throw InvalidArgument("SublevelProblem: c0 must be positive");
  const BallGrid& b = ball();
  std::vector<int> zero(b.real_dim(), 0);
  psi_x0_ = psi_[*b.node_at(zero)];

  double min_boundary = std::numeric_limits<double>::infinity();
  const double cell = b.cell_volume();
  weight_.assign(b.node_count(), 0.0);
  base_.resize(b.node_count());
  for (std::size_t i = 0; i < b.node_count(); ++i) {
    base_[i] = psi_[i] - psi_x0_ + c0_ * b.distance2(i);
    if (b.in_closed_ball(i)) weight_[i] = std::exp(F_[i]) * cell;
    if (b.kind(i) == NodeKind::boundary) min_boundary = std::min(min_boundary, std::sqrt(b.distance2(i)));
  }
  r0_ = 0.5 * min_boundary;
}

ScalarField SublevelProblem::psi_s(double s) const {
  std::vector<double> v(base_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = base_[i] - s;
  return ScalarField(psi_.grid(), std::move(v));
}

double SublevelProblem::Phi(double s) const {
  double total = 0.0;
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (base_[i] < s) total += weight_[i];
  }
  return total;
}

double SublevelProblem::A(double s) const {
  double total = 0.0;
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (base_[i] < s) total += (s - base_[i]) * weight_[i];
  }
  return total;
}

double SublevelProblem::A_k(double s, int k) const {
  const solver::SmoothingSequence tau{k};
  const BallGrid& b = ball();
  double total = 0.0;
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (b.kind(i) == NodeKind::interior) total += tau(s - base_[i]) * weight_[i];
  }
  return total;
}

double SublevelProblem::boundary_min(double s) const {
  const BallGrid& b = ball();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (b.kind(i) == NodeKind::boundary) lo = std::min(lo, base_[i] - s);
  }
  return lo;
}

SublevelStats SublevelProblem::stats(double s, const std::vector<int>& k_values) const {
  SublevelStats out;
  out.s = s;
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (weight_[i] > 0.0 && base_[i] < s) out.nodes.push_back(i);
  }
  out.A = A(s);
  out.Phi = Phi(s);
  for (int k : k_values) out.A_k.emplace_back(k, A_k(s, k));
  return out;
}

ScalarField SublevelProblem::comparison_density(double s, int k) const {
  const double ak = A_k(s, k);
  if (!(ak > 0.0)) throw InvalidArgument("comparison_density: A_k(s) must be positive");
  const solver::SmoothingSequence tau{k};
  const BallGrid& b = ball();
  std::vector<double> d(base_.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (b.kind(i) == NodeKind::interior) d[i] = tau(s - base_[i]) * std::exp(F_[i]) / ak;
  }
  return ScalarField(psi_.grid(), std::move(d));
}

std::vector<double> default_s_grid(double S, int count) {
  if (!(S > 0.0) || count < 2) throw InvalidArgument("default_s_grid: need S > 0 and at least two values");
  std::vector<double> grid(count);
  const double lo = std::log(0.01 * S), hi = std::log(0.99 * S);
  for (int i = 0; i < count; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (count - 1));
  return grid;
}

std::vector<SublevelStats> sublevel_scan(const SublevelProblem& problem, const std::vector<double>& s_grid,
                                         const std::vector<int>& k_values) {
  std::vector<SublevelStats> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    if (!(s > 0.0 && s < problem.S())) {
      throw InvalidArgument("sublevel_scan: s = " + std::to_string(s) + " lies outside (0, 4 c0 r0^2)");
    }
    if (!(problem.boundary_min(s) > 0.0)) {
      throw InvalidArgument("sublevel_scan: psi_s is not positive on the ball boundary at s = " + std::to_string(s));
    }
    out.push_back(problem.stats(s, k_values));
  }
  return out;
}

std::vector<PhiASample> phi_a_samples(const SublevelProblem& problem, const std::vector<double>& s_grid) {
  std::vector<PhiASample> out;
  for (double s : s_grid) {
    const double A = problem.A(s);
    const double Phi = problem.Phi(s);
    for (double t : {0.5 * s, 0.25 * s}) out.push_back({s, t, A, Phi, problem.Phi(s - t)});
  }
  return out;
}

}  // namespace qmalab::harness
