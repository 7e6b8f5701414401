#include "qmalab/pointalg.hpp"

#include <algorithm>
#include <limits>

namespace qmalab::pointalg {

namespace {

std::vector<std::uint8_t> interior_mask(const ScalarField& f) {
  if (f.on_torus()) return {};
  const auto& ball = f.ball();
  std::vector<std::uint8_t> mask(ball.node_count());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = ball.kind(i) == geometry::NodeKind::interior;
  return mask;
}

}  // namespace

ConeMembership cone_check(ConeKind kind, const ScalarField& potential, const HermitianField& g,
                          const HermitianField* h, const ComplexStructureJ& J) {
  const auto mask = interior_mask(potential);
  double margin = 0.0;
  if (kind == ConeKind::psh_j) {
    margin = g_tilde(g, potential, J).min_eigenvalue(mask);
  } else {
    if (h == nullptr) throw InvalidArgument("cone_check: psh_J_n1 requires the metric h");
    margin = g_hat(*h, g, potential, J).min_eigenvalue(mask);
  }
  return {margin > 0.0, margin};
}

double laplace_positivity_check(const ScalarField& psi, const HermitianField& g, const HermitianField& h,
                                [[maybe_unused]] const ComplexStructureJ& J) {
  const HermitianField hess = geometry::complex_hessian(psi);
  const auto mask = interior_mask(psi);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hess.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const Matrix upper = geometry::inverse_upper(g.at(i));
    worst = std::min(worst, geometry::contract(upper, h.at(i)) + geometry::contract(upper, hess.at(i)));
  }
  return worst;
}

}  // namespace qmalab::pointalg
