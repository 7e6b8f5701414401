#include "qmalab/harness.hpp"

#include <cmath>

namespace qmalab::harness {

namespace {

IntegralScan scan(const std::vector<double>& grid, double cap, const auto& integral) {
  IntegralScan out;
  bool below = true;
  for (double e : grid) {
    const double v = integral(e);
    out.table.emplace_back(e, v);
    below = below && v <= cap;
    if (below) out.empirical = e;
  }
  return out;
}

}  // namespace

IntegralScan alpha_scan(const ScalarField& psi_sk, const std::vector<double>& alpha_grid, double cap) {
  if (psi_sk.on_torus()) throw InvalidArgument("alpha_scan: field must live on a ball grid");
  const BallGrid& ball = psi_sk.ball();
  const double cell = ball.cell_volume();
  return scan(alpha_grid, cap, [&](double alpha) {
    double total = 0.0;
    for (std::size_t i = 0; i < psi_sk.size(); ++i) {
      if (ball.in_closed_ball(i)) total += std::exp(-alpha * psi_sk[i]) * cell;
    }
    return total;
  });
}

ScalarField trudinger_field(const ScalarField& psi_s, double A, int n) {
  std::vector<double> u(psi_s.size(), 0.0);
  bool nonempty = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (psi_s[i] < 0.0) nonempty = true;
  }
  if (!nonempty) return ScalarField(psi_s.grid(), std::move(u));
  if (!(A > 0.0)) throw InvalidArgument("trudinger_check: A(s) = 0 with a nonempty sublevel set");
  const double scale = std::pow(A, -1.0 / n);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (psi_s[i] < 0.0) u[i] = std::pow(-psi_s[i], (n + 1.0) / n) * scale;
  }
  return ScalarField(psi_s.grid(), std::move(u));
}

IntegralScan trudinger_check(const ScalarField& psi_s, double A, int n, const std::vector<double>& beta_grid,
                             double cap) {
  if (psi_s.on_torus()) throw InvalidArgument("trudinger_check: field must live on a ball grid");
  const ScalarField U = trudinger_field(psi_s, A, n);
  const BallGrid& ball = psi_s.ball();
  const double cell = ball.cell_volume();
  return scan(beta_grid, cap, [&](double beta) {
    double total = 0.0;
    for (std::size_t i = 0; i < U.size(); ++i) {
      if (ball.in_closed_ball(i) && psi_s[i] < 0.0) total += std::exp(beta * U[i]) * cell;
    }
    return total;
  });
}

}  // namespace qmalab::harness
