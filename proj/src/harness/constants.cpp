#include "qmalab/harness.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qmalab::harness {

Constants choose_constants(const HermitianField& h, int n) {
  if (n < 2) throw InvalidArgument("choose_constants: requires n >= 2");
  if (h.dim() != n) throw InvalidArgument("choose_constants: h has the wrong dimension");
  const bool ball = std::holds_alternative<std::shared_ptr<const BallGrid>>(h.grid());
  double C0 = 0.0;
  double ratio = std::numeric_limits<double>::infinity();  // min of lambda_min / tr(h)
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (ball && !std::get<std::shared_ptr<const BallGrid>>(h.grid())->in_closed_ball(i)) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h.at(i), Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || !std::isfinite(hi)) throw InvalidArgument("choose_constants: h is not positive definite");
    C0 = std::max({C0, hi, 1.0 / lo});
    ratio = std::min(ratio, lo / eig.eigenvalues().sum());
  }
  // h - (c0 C0 / (n-1)) tr(h) Id >= 0  <=>  c0 <= (n-1) lambda_min / (C0 tr h).
  const double c0 = 0.9 * (n - 1) * ratio / C0;
  return {C0, c0};
}

}  // namespace qmalab::harness
