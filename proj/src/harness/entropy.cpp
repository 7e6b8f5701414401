#include "qmalab/harness.hpp"

#include <cmath>

namespace qmalab::harness {

double entropy_norm(const ScalarField& F, double p) {
  if (!(p > 0.0)) throw InvalidArgument("entropy_norm: p must be positive");
  std::vector<double> integrand(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) integrand[i] = std::exp(F[i]) * std::pow(1.0 + std::abs(F[i]), p);
  return geometry::integrate(ScalarField(F.grid(), std::move(integrand)));
}

double l1_estimate(const ScalarField& psi) {
  std::vector<double> neg(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) neg[i] = -psi[i];
  return geometry::integrate(ScalarField(psi.grid(), std::move(neg)));
}

}  // namespace qmalab::harness
