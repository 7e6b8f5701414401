#pragma once

// Nonlinear solvers: the two torus equations (with unknown additive constant b)
// and the Dirichlet complex Monge-Ampere problem on a ball.

#include "qmalab/geometry.hpp"
#include "qmalab/pointalg.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmalab::solver {

using geometry::ComplexStructureJ;
using geometry::HermitianField;
using geometry::ScalarField;

enum class EquationKind { cma, n1ma };

const char* to_string(EquationKind kind);
EquationKind equation_kind_from_string(const std::string& name);

struct SolveOptions {
  double tol = 1e-8;  // sup-norm of the log-det residual
  int max_newton = 40;
  int gmres_restart = 30;
  int gmres_max_iter = 400;
  double min_continuation_step = 1.0 / 1024.0;
  std::optional<ScalarField> initial_guess;
};

struct SolveReport {
  explicit SolveReport(ScalarField p) : potential(std::move(p)) {}

  ScalarField potential;  // normalised so that sup = 0
  double b = 0.0;
  std::vector<double> residual_history;  // sup-norms of the final Newton phase
  double cone_margin = 0.0;
  int iterations = 0;  // Newton iterations over all continuation stages
  std::vector<double> continuation;  // accepted continuation parameters t
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::optional<SolveReport> last = std::nullopt)
      : std::runtime_error(what), last_(std::move(last)) {}
  const std::optional<SolveReport>& last_iterate() const { return last_; }

 private:
  std::optional<SolveReport> last_;
};

// log det(g~(phi)) - log det(g) = F + b, sup phi = 0, phi in PSH_J(M, omega).
SolveReport solve_cma_torus(const ScalarField& F, const HermitianField& g, const ComplexStructureJ& J,
                            const SolveOptions& options = {});
// log det(g^(psi)) - log det(g) = F + b, sup psi = 0, psi in PSH_J(M, omega, omega_h).
SolveReport solve_n1ma_torus(const ScalarField& F, const HermitianField& g, const HermitianField& h,
                             const ComplexStructureJ& J, const SolveOptions& options = {});

// F such that `potential` solves the equation with b = 0.
ScalarField manufacture_rhs(EquationKind kind, const ScalarField& potential, const HermitianField& g,
                            const HermitianField* h, const ComplexStructureJ& J);

// tau_k(x) = (x + sqrt(x^2 + 1/k^2)) / 2: smooth, positive, increasing, -> max(x, 0).
struct SmoothingSequence {
  int k;
  double operator()(double x) const;
};

struct DirichletOptions {
  double tol = 1e-6;
  int max_newton = 60;
};

struct DirichletSolution {
  explicit DirichletSolution(ScalarField p) : potential(std::move(p)) {}

  ScalarField potential;  // <= 0, zero on non-interior nodes
  int iterations = 0;
  double residual = 0.0;  // sup over interior nodes of |det(u_{i\bar j}) - density|
  double min_hessian_eigenvalue = 0.0;
};

// det(u_{i\bar j}) = density at interior ball nodes, u = 0 elsewhere.
DirichletSolution solve_dirichlet_ma_ball(const ScalarField& density, const DirichletOptions& options = {});

// <dir>/report.json and <dir>/potential.field.
void write_report(const std::filesystem::path& dir, const SolveReport& report);
SolveReport read_report(const std::filesystem::path& dir);

}  // namespace qmalab::solver
