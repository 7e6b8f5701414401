#include "qmalab/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qmalab::solver {

using geometry::BallGrid;
using geometry::NodeKind;

namespace {

// Stencil of one interior node: its own index plus axis and diagonal neighbours.
struct Stencil {
  std::size_t centre;
  std::vector<std::size_t> axis;      // [2a] = +a, [2a+1] = -a
  std::vector<std::size_t> diagonal;  // per pair a < b: ++, +-, -+, --
};

class BallProblem {
 public:
  explicit BallProblem(const BallGrid& ball) : ball_(ball), dim_(ball.real_dim()) {
    h2_ = ball.spacing() * ball.spacing();
    unknown_.assign(ball.node_count(), -1);
    std::vector<int> off(dim_);
    for (std::size_t i = 0; i < ball.node_count(); ++i) {
      if (ball.kind(i) != NodeKind::interior) continue;
      unknown_[i] = static_cast<long>(interior_.size());
      interior_.push_back(i);
      Stencil s{i, {}, {}};
      ball.offsets(i, off);
      for (int a = 0; a < dim_; ++a) {
        for (int sa : {1, -1}) {
          off[a] += sa;
          s.axis.push_back(*ball.node_at(off));
          off[a] -= sa;
        }
        for (int b = a + 1; b < dim_; ++b) {
          for (int sa : {1, -1}) {
            for (int sb : {1, -1}) {
              off[a] += sa;
              off[b] += sb;
              s.diagonal.push_back(*ball.node_at(off));
              off[a] -= sa;
              off[b] -= sb;
            }
          }
        }
      }
      stencils_.push_back(std::move(s));
    }
    // Coefficient matrices of contract(Q, P(E)) for each real unit Hessian E.
    for (int a = 0; a < dim_; ++a) {
      for (int b = a; b < dim_; ++b) {
        RealMatrix e = RealMatrix::Zero(dim_, dim_);
        e(a, b) = e(b, a) = 1.0;
        unit_.push_back(geometry::complex_from_real_hessian(e));
      }
    }
  }

  std::size_t size() const { return interior_.size(); }
  std::size_t node(std::size_t k) const { return interior_[k]; }

  RealMatrix real_hessian(std::span<const double> u, const Stencil& s) const {
    RealMatrix d(dim_, dim_);
    const double c = u[s.centre];
    std::size_t q = 0;
    for (int a = 0; a < dim_; ++a) {
      d(a, a) = (u[s.axis[2 * a]] + u[s.axis[2 * a + 1]] - 2.0 * c) / h2_;
      for (int b = a + 1; b < dim_; ++b, q += 4) {
        const double acc = u[s.diagonal[q]] - u[s.diagonal[q + 1]] - u[s.diagonal[q + 2]] + u[s.diagonal[q + 3]];
        d(a, b) = d(b, a) = acc / (4.0 * h2_);
      }
    }
    return d;
  }

  struct Evaluation {
    std::vector<double> log_det;
    std::vector<double> det;
    std::vector<Matrix> upper;  // conj(U^{-1}) per interior node
    double min_eigenvalue = std::numeric_limits<double>::infinity();
  };

  Evaluation evaluate(std::span<const double> u) const {
    Evaluation ev;
    ev.log_det.resize(size());
    ev.det.resize(size());
    ev.upper.resize(size());
    for (std::size_t k = 0; k < size(); ++k) {
      const Matrix p = geometry::complex_from_real_hessian(real_hessian(u, stencils_[k]));
      Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
      const auto& lambda = eig.eigenvalues();
      ev.min_eigenvalue = std::min(ev.min_eigenvalue, lambda.minCoeff());
      if (lambda.minCoeff() <= 0.0) return ev;
      ev.log_det[k] = lambda.array().log().sum();
      ev.det[k] = std::exp(ev.log_det[k]);
      const Matrix& v = eig.eigenvectors();
      ev.upper[k] = (v * lambda.cwiseInverse().asDiagonal() * v.adjoint()).conjugate();
    }
    return ev;
  }

  Eigen::SparseMatrix<double> jacobian(const Evaluation& ev) const {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(size() * (1 + 2 * dim_ + 2 * dim_ * (dim_ - 1)));
    auto add = [&](long row, std::size_t node, double value) {
      const long col = unknown_[node];
      if (col >= 0) triplets.emplace_back(row, col, value);
    };
    for (std::size_t k = 0; k < size(); ++k) {
      const Stencil& s = stencils_[k];
      const Matrix& q = ev.upper[k];
      const long row = static_cast<long>(k);
      double centre = 0.0;
      std::size_t unit = 0, diag = 0;
      for (int a = 0; a < dim_; ++a) {
        for (int b = a; b < dim_; ++b, ++unit) {
          const double coeff = geometry::contract(q, unit_[unit]);
          if (a == b) {
            add(row, s.axis[2 * a], coeff / h2_);
            add(row, s.axis[2 * a + 1], coeff / h2_);
            centre -= 2.0 * coeff / h2_;
          } else {
            const double w = coeff / (4.0 * h2_);
            add(row, s.diagonal[diag], w);
            add(row, s.diagonal[diag + 1], -w);
            add(row, s.diagonal[diag + 2], -w);
            add(row, s.diagonal[diag + 3], w);
            diag += 4;
          }
        }
      }
      triplets.emplace_back(row, row, centre);
    }
    Eigen::SparseMatrix<double> jac(size(), size());
    jac.setFromTriplets(triplets.begin(), triplets.end());
    return jac;
  }

 private:
  const BallGrid& ball_;
  int dim_;
  double h2_;
  std::vector<long> unknown_;
  std::vector<std::size_t> interior_;
  std::vector<Stencil> stencils_;
  std::vector<Matrix> unit_;
};

double sup_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

DirichletSolution solve_dirichlet_ma_ball(const ScalarField& density, const DirichletOptions& options) {
  if (density.on_torus()) throw InvalidArgument("solve_dirichlet_ma_ball: density must live on a ball grid");
  if (!(options.tol > 0.0)) throw InvalidArgument("solve_dirichlet_ma_ball: tolerance must be positive");
  const BallGrid& ball = density.ball();
  const std::size_t count = ball.node_count();

  BallProblem problem(ball);
  const std::size_t unknowns = problem.size();
  if (unknowns == 0) throw InvalidArgument("solve_dirichlet_ma_ball: ball has no interior nodes");

  std::vector<double> f(unknowns);
  double f_max = 0.0, f_mean = 0.0;
  for (std::size_t k = 0; k < unknowns; ++k) {
    const double v = density[problem.node(k)];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("solve_dirichlet_ma_ball: density must be finite and nonnegative");
    }
    f[k] = v;
    f_max = std::max(f_max, v);
    f_mean += v;
  }
  f_mean /= static_cast<double>(unknowns);
  if (f_max == 0.0) {
    return DirichletSolution(ScalarField::zeros(density.grid()));
  }
  // log det needs a positive target.
  const double floor = 1e-8 * f_max;
  for (double& v : f) v = std::max(v, floor);

  // Homotopy from the exact quadratic a(|x - x0|^2 - R^2) (constant density a^2,
  // quadratic boundary values) to the target (density f, zero boundary values).
  const double a = std::sqrt(f_mean);
  const double r2 = ball.radius() * ball.radius();
  std::vector<double> quadratic(count);
  for (std::size_t i = 0; i < count; ++i) quadratic[i] = a * (ball.distance2(i) - r2);

  std::vector<double> u = quadratic;
  std::vector<double> target(unknowns), trial(count), residual(unknowns);
  DirichletSolution out(ScalarField::zeros(density.grid()));

  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> iterative;
  iterative.preconditioner().setDroptol(1e-2);
  iterative.preconditioner().setFillfactor(4);

  auto set_stage = [&](double theta, std::vector<double>& values) {
    for (std::size_t i = 0; i < count; ++i) {
      if (ball.kind(i) != NodeKind::interior) values[i] = (1.0 - theta) * quadratic[i];
    }
    for (std::size_t k = 0; k < unknowns; ++k) target[k] = std::log((1.0 - theta) * a * a + theta * f[k]);
  };

  // Newton at fixed theta; returns false on failure (u unchanged in that case).
  auto newton = [&](double theta, double log_tol, bool final_stage) {
    std::vector<double> v = u;
    set_stage(theta, v);
    auto ev = problem.evaluate(v);
    if (!(ev.min_eigenvalue > 0.0)) return false;
    auto compute_residual = [&](const BallProblem::Evaluation& e) {
      for (std::size_t k = 0; k < unknowns; ++k) residual[k] = e.log_det[k] - target[k];
    };
    compute_residual(ev);
    double norm = l2(residual);
    for (int it = 0; it < options.max_newton; ++it) {
      bool done = sup_abs(residual) <= log_tol;
      if (done && final_stage) {
        double abs_res = 0.0;
        for (std::size_t k = 0; k < unknowns; ++k) abs_res = std::max(abs_res, std::abs(ev.det[k] - f[k]));
        done = abs_res <= 0.25 * options.tol;
      }
      if (done) {
        u = std::move(v);
        return true;
      }
      ++out.iterations;
      const auto jac = problem.jacobian(ev);
      Eigen::Map<const Eigen::VectorXd> rhs(residual.data(), unknowns);
      iterative.setTolerance(std::clamp(sup_abs(residual), 1e-12, 1e-3));
      iterative.compute(jac);
      Eigen::VectorXd step;
      if (iterative.info() == Eigen::Success) step = -iterative.solve(rhs);
      if (iterative.info() != Eigen::Success) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success) return false;
        step = -lu.solve(rhs);
      }
      double alpha = 1.0;
      bool accepted = false;
      for (int halving = 0; halving < 20 && !accepted; ++halving, alpha *= 0.5) {
        trial = v;
        for (std::size_t k = 0; k < unknowns; ++k) trial[problem.node(k)] += alpha * step[k];
        auto next = problem.evaluate(trial);
        if (!(next.min_eigenvalue > 0.0)) continue;
        std::vector<double> saved = residual;
        compute_residual(next);
        const double next_norm = l2(residual);
        if (next_norm <= (1.0 - 1e-4 * alpha) * norm) {
          v = trial;
          ev = std::move(next);
          norm = next_norm;
          accepted = true;
        } else {
          residual = std::move(saved);
        }
      }
      if (!accepted) return false;
    }
    return false;
  };

  const double final_log_tol = 0.25 * options.tol / std::max(1.0, f_max);
  double theta = 0.0;
  double step = 1.0;
  while (theta < 1.0) {
    const double next = std::min(1.0, theta + step);
    const bool final_stage = next == 1.0;
    if (newton(next, final_stage ? final_log_tol : 1e-3, final_stage)) {
      theta = next;
      step = std::min(1.0, 2.0 * step);
    } else {
      step *= 0.5;
      if (step < 1e-4) {
        std::ostringstream msg;
        msg << "solve_dirichlet_ma_ball: damped Newton failed to converge (homotopy stalled at " << theta << ")";
        throw SolverError(msg.str());
      }
    }
  }

  set_stage(1.0, u);
  const auto ev = problem.evaluate(u);
  double abs_res = 0.0;
  for (std::size_t k = 0; k < unknowns; ++k) {
    abs_res = std::max(abs_res, std::abs(ev.det[k] - density[problem.node(k)]));
  }
  out.potential = ScalarField(density.grid(), std::move(u));
  out.residual = abs_res;
  out.min_hessian_eigenvalue = ev.min_eigenvalue;
  return out;
}

}  // namespace qmalab::solver
