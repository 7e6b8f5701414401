#include "qmalab/pointalg.hpp"

#include <cmath>

namespace qmalab::pointalg {

double det_identity_residual_point(const Matrix& g_tilde, const Matrix& g, const Matrix& j, double F) {
  const Matrix theta = theta_tilde_point(g_tilde, j);
  return hermitian_det(theta) * std::exp(F) * hermitian_det(g) - 1.0;
}

double det_inequality_gap_point(const Matrix& g_hat, const Matrix& g, const Matrix& j, double F) {
  const Matrix theta = theta_hat_point(g_hat, g, j);
  return hermitian_det(theta) - std::exp(-F) / hermitian_det(g);
}

namespace {

template <class Fn>
ScalarField pointwise(const HermitianField& a, const HermitianField& g, const ScalarField& F, Fn&& fn) {
  if (!geometry::same_grid(a.grid(), g.grid()) || !geometry::same_grid(a.grid(), F.grid())) {
    throw InvalidArgument("determinant check: grid mismatch");
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(a.at(i), g.at(i), F[i]);
  return ScalarField(a.grid(), std::move(out));
}

}  // namespace

ScalarField det_identity_residual(const HermitianField& g_tilde, const HermitianField& g, const ComplexStructureJ& J,
                             const ScalarField& F) {
  return pointwise(g_tilde, g, F, [&](const auto& gt, const auto& gg, double f) {
    return det_identity_residual_point(gt, gg, J.matrix(), f);
  });
}

ScalarField det_inequality_gap(const HermitianField& g_hat_field, const HermitianField& g, const ComplexStructureJ& J,
                        const ScalarField& F) {
  return pointwise(g_hat_field, g, F, [&](const auto& gh, const auto& gg, double f) {
    return det_inequality_gap_point(gh, gg, J.matrix(), f);
  });
}

}  // namespace qmalab::pointalg
