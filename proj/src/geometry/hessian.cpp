#include "qmalab/geometry.hpp"
#include "qmalab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qmalab::geometry {

Matrix complex_from_real_hessian(const RealMatrix& d) {
  const int n = static_cast<int>(d.rows()) / 2;
  Matrix p(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
      p(j, k) = 0.25 * Complex(d(xj, xk) + d(yj, yk), d(xj, yk) - d(yj, xk));
    }
  }
  return p;
}

Matrix twist(const Matrix& p, const Matrix& j) {
  return 0.5 * (p + j * p.conjugate() * j.adjoint());
}

double contract(const Matrix& upper, const Matrix& lower) {
  return upper.cwiseProduct(lower).sum().real();
}

Matrix inverse_upper(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const auto& lambda = eig.eigenvalues();
  if (lambda(0) <= 0.0 || !std::isfinite(lambda(0))) {
    throw InvalidArgument("inverse_upper: matrix is not positive definite");
  }
  const Matrix inv = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
  return inv.conjugate();
}

namespace {

RealMatrix ball_real_hessian(const ScalarField& phi, std::size_t node) {
  const BallGrid& ball = phi.ball();
  const int dim = ball.real_dim();
  const double h2 = ball.spacing() * ball.spacing();
  std::vector<int> off(dim);
  ball.offsets(node, off);
  auto value = [&](std::span<const int> o) { return phi[*ball.node_at(o)]; };
  const double centre = phi[node];
  RealMatrix d(dim, dim);
  for (int a = 0; a < dim; ++a) {
    off[a] += 1;
    const double up = value(off);
    off[a] -= 2;
    const double down = value(off);
    off[a] += 1;
    d(a, a) = (up + down - 2.0 * centre) / h2;
    for (int b = a + 1; b < dim; ++b) {
      double acc = 0.0;
      for (int sa : {1, -1}) {
        for (int sb : {1, -1}) {
          off[a] += sa;
          off[b] += sb;
          acc += sa * sb * value(off);
          off[a] -= sa;
          off[b] -= sb;
        }
      }
      d(a, b) = d(b, a) = acc / (4.0 * h2);
    }
  }
  return d;
}

}  // namespace

Matrix complex_hessian_at(const ScalarField& phi, std::size_t node) {
  if (phi.ball().kind(node) != NodeKind::interior) {
    throw InvalidArgument("complex_hessian: ball node " + std::to_string(node) + " is not interior");
  }
  return complex_from_real_hessian(ball_real_hessian(phi, node));
}

HermitianField complex_hessian(const ScalarField& phi) {
  if (phi.on_torus()) {
    const auto& handle = std::get<std::shared_ptr<const TorusGrid>>(phi.grid());
    SpectralOperator spectral(handle);
    spectral.load(phi.values());
    return spectral.hessian();
  }
  const BallGrid& ball = phi.ball();
  HermitianField out(phi.grid(), ball.n());
  for (std::size_t i = 0; i < ball.node_count(); ++i) {
    if (ball.kind(i) == NodeKind::interior) out.at(i) = complex_hessian_at(phi, i);
  }
  return out;
}

HermitianField twisted_hessian(const ScalarField& phi, const ComplexStructureJ& J) {
  if (J.dim() != complex_dim(phi.grid())) throw InvalidArgument("twisted_hessian: J dimension mismatch");
  HermitianField p = complex_hessian(phi);
  const Matrix& m = J.matrix();
  for (std::size_t i = 0; i < p.size(); ++i) {
    Matrix pi = p.at(i);
    p.at(i) = twist(pi, m);
  }
  return p;
}

ScalarField quaternionic_laplacian(const ScalarField& psi, const HermitianField& g,
                                   const ComplexStructureJ& J) {
  if (!same_grid(psi.grid(), g.grid())) throw InvalidArgument("quaternionic_laplacian: grid mismatch");
  const HermitianField h = twisted_hessian(psi, J);
  std::vector<double> out(psi.size());
  const bool ball = !psi.on_torus();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (ball && psi.ball().kind(i) != NodeKind::interior) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g.at(i), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(0) <= 0.0) throw InvalidArgument("quaternionic_laplacian: singular metric");
    out[i] = contract(inverse_upper(g.at(i)), h.at(i));
  }
  return ScalarField(psi.grid(), std::move(out));
}

ScalarField restrict_to_ball(const ScalarField& torus_field, const std::shared_ptr<const BallGrid>& ball) {
  const TorusGrid& torus = torus_field.torus();
  if (ball->real_dim() != torus.real_dim()) throw InvalidArgument("restrict_to_ball: dimension mismatch");
  if (std::abs(ball->spacing() - torus.spacing()) > 1e-12 * torus.spacing()) {
    throw InvalidArgument("restrict_to_ball: ball spacing must equal torus spacing");
  }
  if (ball->points_per_dim() > torus.res()) throw InvalidArgument("restrict_to_ball: ball wraps onto itself");
  const int dim = torus.real_dim();
  std::vector<int> base(dim), off(dim), idx(dim);
  for (int a = 0; a < dim; ++a) base[a] = static_cast<int>(std::lround(ball->center()[a] / torus.spacing()));
  std::vector<double> values(ball->node_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ball->offsets(i, off);
    for (int a = 0; a < dim; ++a) idx[a] = base[a] + off[a];
    values[i] = torus_field[torus.node_index(idx)];
  }
  return ScalarField(ball, std::move(values));
}

std::shared_ptr<const BallGrid> ball_at_node(const TorusGrid& torus, std::size_t node, double radius) {
  return std::make_shared<const BallGrid>(torus.n(), torus.coordinates(node), radius, torus.spacing());
}

}  // namespace qmalab::geometry
