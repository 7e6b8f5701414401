#include "qmalab/solver.hpp"
#include "qmalab/spectral.hpp"

#include "gmres.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qmalab::solver {

using geometry::SpectralOperator;
using geometry::TorusGrid;

const char* to_string(EquationKind kind) { return kind == EquationKind::cma ? "cma" : "n1ma"; }

EquationKind equation_kind_from_string(const std::string& name) {
  if (name == "cma") return EquationKind::cma;
  if (name == "n1ma") return EquationKind::n1ma;
  throw InvalidArgument("unknown equation kind '" + name + "' (expected cma or n1ma)");
}

double SmoothingSequence::operator()(double x) const {
  const double eps = 1.0 / static_cast<double>(k);
  return 0.5 * (x + std::sqrt(x * x + eps * eps));
}

namespace {

// Per-node data of the linearisation at the current iterate.
struct State {
  HermitianField theta;
  std::vector<double> log_ratio;  // log det(metric) - log det(g)
  double margin = std::numeric_limits<double>::infinity();
};

class TorusEquation {
 public:
  TorusEquation(EquationKind kind, const HermitianField& g, const HermitianField* h, const ComplexStructureJ& J)
      : kind_(kind), g_(g), h_(h), j_(J.matrix()),
        grid_(std::get<std::shared_ptr<const TorusGrid>>(g.grid())), spectral_(grid_) {
    if (kind == EquationKind::n1ma && h == nullptr) throw InvalidArgument("n1ma requires the metric h");
    if (kind == EquationKind::n1ma && g.dim() < 2) throw InvalidArgument("n1ma requires n >= 2");
    log_det_g_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) log_det_g_[i] = std::log(pointalg::hermitian_det(g.at(i)));
  }

  const std::shared_ptr<const TorusGrid>& grid() const { return grid_; }
  SpectralOperator& spectral() { return spectral_; }

  // Builds Theta and log det ratios at phi. `margin` <= 0 signals a cone exit.
  State evaluate(std::span<const double> phi) {
    spectral_.load(phi);
    State state{spectral_.hessian(), std::vector<double>(phi.size()), std::numeric_limits<double>::infinity()};
    const int n = g_.dim();
    Matrix g_upper;
    Matrix last_g;
    for (std::size_t i = 0; i < state.theta.size(); ++i) {
      const Matrix twisted = geometry::twist(state.theta.at(i), j_);
      const auto g = g_.at(i);
      Matrix metric;
      if (kind_ == EquationKind::cma) {
        metric = g + twisted;
      } else {
        if (last_g.size() == 0 || !last_g.isApprox(g, 0.0)) {
          last_g = g;
          g_upper = geometry::inverse_upper(last_g);
        }
        const double lap = geometry::contract(g_upper, twisted);
        metric = h_->at(i) + (lap * g - twisted) / static_cast<double>(n - 1);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(metric);
      const auto& lambda = eig.eigenvalues();
      state.margin = std::min(state.margin, lambda.minCoeff());
      if (lambda.minCoeff() <= 0.0) {
        state.log_ratio[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      state.log_ratio[i] = lambda.array().log().sum() - log_det_g_[i];
      const Matrix& v = eig.eigenvectors();
      const Matrix upper = (v * lambda.cwiseInverse().asDiagonal() * v.adjoint()).conjugate();
      const Matrix paired = 0.5 * (upper + j_.adjoint() * upper.transpose() * j_);
      if (kind_ == EquationKind::cma) {
        state.theta.at(i) = paired;
      } else {
        const double tr = geometry::contract(upper, g);
        state.theta.at(i) = (tr * g_upper - paired) / static_cast<double>(n - 1);
      }
    }
    return state;
  }

  std::vector<double> rhs_at_zero_metric(std::span<const double> phi) {
    const State s = evaluate(phi);
    if (!(s.margin > 0.0)) throw InvalidArgument("initial guess lies outside the cone");
    return s.log_ratio;
  }

 private:
  EquationKind kind_;
  const HermitianField& g_;
  const HermitianField* h_;
  Matrix j_;
  std::shared_ptr<const TorusGrid> grid_;
  SpectralOperator spectral_;
  std::vector<double> log_det_g_;
};

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct Iterate {
  std::vector<double> phi;
  double b = 0.0;
};

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;
  double margin = 0.0;
};

std::vector<double> residual(const State& s, std::span<const double> F, double b) {
  std::vector<double> r(F.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = s.log_ratio[i] - F[i] - b;
  return r;
}

// Damped Newton for log_ratio(phi) = F + b with mean(delta phi) = 0.
NewtonOutcome newton(TorusEquation& eq, std::span<const double> F, Iterate& it, double tol,
                     const SolveOptions& options) {
  const std::size_t count = F.size();
  const int n = eq.grid()->n();
  NewtonOutcome out;
  State state = eq.evaluate(it.phi);
  if (!(state.margin > 0.0)) return out;
  std::vector<double> r = residual(state, F, it.b);
  double sup = sup_norm(r);
  double l2 = l2_norm(r);
  out.history.push_back(sup);
  out.margin = state.margin;

  std::vector<double> sigma(count), scaled(count), field(count);
  std::vector<double> rhs(count + 1), x(count + 1), trial(count);

  while (sup > tol) {
    if (out.iterations >= options.max_newton) return out;
    ++out.iterations;

    // Right preconditioner: sigma(x) L0 with L0 the node-averaged normalised tensor.
    Matrix mean_theta = Matrix::Zero(n, n);
    double mean_inv_sigma = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      sigma[i] = state.theta.at(i).trace().real() / n;
      mean_theta += state.theta.at(i) / sigma[i];
      mean_inv_sigma += 1.0 / sigma[i];
    }
    mean_theta /= static_cast<double>(count);
    mean_inv_sigma /= static_cast<double>(count);

    auto& spectral = eq.spectral();
    const detail::LinearMap apply = [&](std::span<const double> in, std::span<double> result) {
      spectral.load(in.first(count));
      spectral.contract_hessian(state.theta, result.first(count));
      double mean = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        result[i] -= in[count];
        mean += in[i];
      }
      result[count] = mean / static_cast<double>(count);
    };
    const detail::LinearMap precondition = [&](std::span<const double> in, std::span<double> result) {
      double mean = 0.0;
      for (std::size_t i = 0; i < count; ++i) mean += in[i] / sigma[i];
      const double beta = -(mean / static_cast<double>(count)) / mean_inv_sigma;
      for (std::size_t i = 0; i < count; ++i) scaled[i] = (in[i] + beta) / sigma[i];
      spectral.solve_constant(mean_theta, scaled, result.first(count));
      for (std::size_t i = 0; i < count; ++i) result[i] += in[count];
      result[count] = beta;
    };

    for (std::size_t i = 0; i < count; ++i) rhs[i] = -r[i];
    rhs[count] = 0.0;
    std::fill(x.begin(), x.end(), 0.0);
    const double forcing = std::clamp(sup, 1e-11, 1e-2);
    detail::gmres(apply, precondition, rhs, x, options.gmres_restart, options.gmres_max_iter, forcing);

    // Backtracking: stay in the cone and decrease both norms of the residual.
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 12 && !accepted; ++halving, alpha *= 0.5) {
      for (std::size_t i = 0; i < count; ++i) trial[i] = it.phi[i] + alpha * x[i];
      const double trial_b = it.b + alpha * x[count];
      State next = eq.evaluate(trial);
      if (!(next.margin > 0.0)) continue;
      std::vector<double> next_r = residual(next, F, trial_b);
      const double next_sup = sup_norm(next_r);
      const double next_l2 = l2_norm(next_r);
      if (next_l2 <= (1.0 - 1e-4 * alpha) * l2 && next_sup < sup) {
        it.phi.assign(trial.begin(), trial.end());
        it.b = trial_b;
        state = std::move(next);
        r = std::move(next_r);
        sup = next_sup;
        l2 = next_l2;
        accepted = true;
      }
    }
    if (!accepted) return out;
    out.history.push_back(sup);
    out.margin = state.margin;
  }
  out.converged = true;
  return out;
}

SolveReport solve_torus(EquationKind kind, const ScalarField& F, const HermitianField& g, const HermitianField* h,
                        const ComplexStructureJ& J, const SolveOptions& options) {
  if (!F.on_torus()) throw InvalidArgument("torus solver: F must live on a torus grid");
  if (!geometry::same_grid(F.grid(), g.grid()) || (h && !geometry::same_grid(F.grid(), h->grid()))) {
    throw InvalidArgument("torus solver: grid mismatch");
  }
  if (g.dim() != J.dim()) throw InvalidArgument("torus solver: J dimension mismatch");
  if (!(options.tol > 0.0)) throw InvalidArgument("torus solver: tolerance must be positive");
  for (double f : F.values()) {
    if (!std::isfinite(f)) throw InvalidArgument("torus solver: F must be finite");
  }

  TorusEquation eq(kind, g, h, J);
  const std::size_t count = F.size();
  Iterate it;
  if (options.initial_guess) {
    if (!geometry::same_grid(options.initial_guess->grid(), F.grid())) {
      throw InvalidArgument("torus solver: initial guess grid mismatch");
    }
    const auto v = options.initial_guess->values();
    it.phi.assign(v.begin(), v.end());
  } else {
    it.phi.assign(count, 0.0);
  }
  // F_0 is solved exactly by the initial guess; continuation runs F_t = (1 - t) F_0 + t F.
  const std::vector<double> F0 = eq.rhs_at_zero_metric(it.phi);

  SolveReport report(ScalarField::zeros(F.grid()));
  std::vector<double> Ft(count);
  double t = 0.0;
  double step = 1.0;
  NewtonOutcome last;
  while (t < 1.0) {
    const double t_try = std::min(1.0, t + step);
    for (std::size_t i = 0; i < count; ++i) Ft[i] = (1.0 - t_try) * F0[i] + t_try * F[i];
    Iterate trial = it;
    const double stage_tol = t_try < 1.0 ? std::max(options.tol, 1e-4) : options.tol;
    NewtonOutcome outcome = newton(eq, Ft, trial, stage_tol, options);
    report.iterations += outcome.iterations;
    if (outcome.converged) {
      it = std::move(trial);
      t = t_try;
      report.continuation.push_back(t);
      last = std::move(outcome);
      step = std::min(1.0, 2.0 * step);
      continue;
    }
    step *= 0.5;
    if (step < options.min_continuation_step) {
      SolveReport partial(ScalarField(F.grid(), it.phi));
      partial.b = it.b;
      partial.iterations = report.iterations;
      partial.continuation = report.continuation;
      partial.residual_history = outcome.history;
      partial.cone_margin = outcome.margin;
      std::ostringstream msg;
      msg << to_string(kind) << " solver: continuation stalled at t = " << t
          << " (Newton failed to converge or left the cone)";
      throw SolverError(msg.str(), std::move(partial));
    }
  }

  const double top = *std::max_element(it.phi.begin(), it.phi.end());
  for (double& v : it.phi) v -= top;
  report.potential = ScalarField(F.grid(), std::move(it.phi));
  report.b = it.b;
  report.residual_history = std::move(last.history);
  report.cone_margin = last.margin;
  return report;
}

}  // namespace

SolveReport solve_cma_torus(const ScalarField& F, const HermitianField& g, const ComplexStructureJ& J,
                            const SolveOptions& options) {
  return solve_torus(EquationKind::cma, F, g, nullptr, J, options);
}

SolveReport solve_n1ma_torus(const ScalarField& F, const HermitianField& g, const HermitianField& h,
                             const ComplexStructureJ& J, const SolveOptions& options) {
  return solve_torus(EquationKind::n1ma, F, g, &h, J, options);
}

}  // namespace qmalab::solver
