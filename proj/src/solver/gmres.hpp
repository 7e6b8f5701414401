#pragma once

#include <functional>
#include <span>

namespace qmalab::solver::detail {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Restarted GMRES with right preconditioning; x holds the initial guess.
GmresResult gmres(const LinearMap& apply, const LinearMap& precondition, std::span<const double> rhs,
                  std::span<double> x, int restart, int max_iter, double rel_tol);

}  // namespace qmalab::solver::detail
