#include "qmalab/solver.hpp"

namespace qmalab::solver {

ScalarField manufacture_rhs(EquationKind kind, const ScalarField& potential, const HermitianField& g,
                            const HermitianField* h, const ComplexStructureJ& J) {
  const HermitianField metric = kind == EquationKind::cma
                                    ? pointalg::g_tilde(g, potential, J)
                                    : (h ? pointalg::g_hat(*h, g, potential, J)
                                         : throw InvalidArgument("manufacture_rhs: n1ma requires the metric h"));
  const double margin = metric.min_eigenvalue();
  if (!(margin > 0.0)) {
    throw InvalidArgument(std::string("manufacture_rhs: potential is outside the ") +
                          (kind == EquationKind::cma ? "PSH_J" : "PSH_J_n1") + " cone (margin " +
                          std::to_string(margin) + ")");
  }
  return pointalg::log_det_ratio(metric, g);
}

}  // namespace qmalab::solver
