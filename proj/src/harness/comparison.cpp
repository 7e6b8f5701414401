#include "qmalab/harness.hpp"

#include <cmath>
#include <limits>

namespace qmalab::harness {

double comparison_epsilon(double A_k, int n) {
  if (!(A_k >= 0.0)) throw InvalidArgument("comparison_epsilon: A_k must be nonnegative");
  if (n < 1) throw InvalidArgument("comparison_epsilon: n must be positive");
  const double np1 = n + 1.0;
  return std::pow(A_k, 1.0 / np1) * std::pow(np1 / n, n / np1);
}

ComparisonResult comparison_check(const ScalarField& psi_s, const ScalarField& psi_sk, double A_k, int n) {
  if (!geometry::same_grid(psi_s.grid(), psi_sk.grid())) throw InvalidArgument("comparison_check: grid mismatch");
  if (psi_s.on_torus()) throw InvalidArgument("comparison_check: fields must live on a ball grid");
  ComparisonResult out;
  out.eps = comparison_epsilon(A_k, n);
  out.margin = std::numeric_limits<double>::infinity();
  const BallGrid& ball = psi_s.ball();
  const double power = n / (n + 1.0);
  for (std::size_t i = 0; i < psi_s.size(); ++i) {
    if (!ball.in_closed_ball(i)) continue;
    const double depth = std::max(0.0, -psi_sk[i]);
    const double m = out.eps * std::pow(depth, power) + psi_s[i];
    if (m < out.margin) {
      out.margin = m;
      out.worst_node = i;
    }
  }
  return out;
}

}  // namespace qmalab::harness
