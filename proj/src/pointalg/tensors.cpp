#include "qmalab/pointalg.hpp"
#include "qmalab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qmalab::pointalg {

using geometry::contract;
using geometry::inverse_upper;
using geometry::same_grid;

Matrix g_tilde_point(const Matrix& g, const Matrix& twisted) { return g + twisted; }

Matrix g_hat_point(const Matrix& h, const Matrix& g, const Matrix& twisted) {
  const auto n = g.rows();
  if (n < 2) throw InvalidArgument("g_hat: requires n >= 2");
  const double laplacian = contract(inverse_upper(g), twisted);
  return h + (laplacian * g - twisted) / static_cast<double>(n - 1);
}

Matrix theta_tilde_point(const Matrix& g_tilde, const Matrix& j) {
  const Matrix upper = inverse_upper(g_tilde);
  return 0.5 * (upper + j.adjoint() * upper.transpose() * j);
}

Matrix theta_hat_point(const Matrix& g_hat, const Matrix& g, const Matrix& j) {
  const auto n = g.rows();
  if (n < 2) throw InvalidArgument("theta_hat: requires n >= 2");
  const Matrix upper = inverse_upper(g_hat);
  const double tr = contract(upper, g);
  const Matrix paired = 0.5 * (upper + j.adjoint() * upper.transpose() * j);
  return (tr * inverse_upper(g) - paired) / static_cast<double>(n - 1);
}

double trace_against(const Matrix& a, const Matrix& b) { return contract(inverse_upper(a), b); }

double hermitian_det(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().prod();
}

std::vector<double> theta_hat_diagonal(std::span<const double> mu) {
  const std::size_t n = mu.size();
  if (n < 2) throw InvalidArgument("theta_hat_diagonal: requires n >= 2");
  double total = 0.0;
  for (double m : mu) {
    if (!(m > 0.0)) throw InvalidArgument("theta_hat_diagonal: eigenvalues must be positive");
    total += 1.0 / m;
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (total - 1.0 / mu[i]) / static_cast<double>(n - 1);
  return out;
}

HermitianField g_tilde(const HermitianField& g, const ScalarField& phi, const ComplexStructureJ& J) {
  if (!same_grid(g.grid(), phi.grid())) throw InvalidArgument("g_tilde: grid mismatch");
  HermitianField out = geometry::twisted_hessian(phi, J);
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) += g.at(i);
  return out;
}

HermitianField g_hat(const HermitianField& h, const HermitianField& g, const ScalarField& psi,
                     const ComplexStructureJ& J) {
  if (!same_grid(g.grid(), psi.grid()) || !same_grid(h.grid(), psi.grid())) {
    throw InvalidArgument("g_hat: grid mismatch");
  }
  if (g.dim() < 2) throw InvalidArgument("g_hat: requires n >= 2");
  HermitianField out = geometry::twisted_hessian(psi, J);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Matrix twisted = out.at(i);
    out.at(i) = g_hat_point(h.at(i), g.at(i), twisted);
  }
  return out;
}

HermitianField theta_tilde(const HermitianField& g_tilde_field, const ComplexStructureJ& J) {
  HermitianField out(g_tilde_field.grid(), g_tilde_field.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = theta_tilde_point(g_tilde_field.at(i), J.matrix());
  return out;
}

HermitianField theta_hat(const HermitianField& g_hat_field, const HermitianField& g, const ComplexStructureJ& J) {
  if (!same_grid(g_hat_field.grid(), g.grid())) throw InvalidArgument("theta_hat: grid mismatch");
  HermitianField out(g.grid(), g.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = theta_hat_point(g_hat_field.at(i), g.at(i), J.matrix());
  return out;
}

ScalarField log_det_ratio(const HermitianField& a, const HermitianField& b) {
  if (!same_grid(a.grid(), b.grid())) throw InvalidArgument("log_det_ratio: grid mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(hermitian_det(a.at(i)) / hermitian_det(b.at(i)));
  return ScalarField(a.grid(), std::move(out));
}

ScalarField trace_field(const HermitianField& a, const HermitianField& b) {
  if (!same_grid(a.grid(), b.grid())) throw InvalidArgument("trace_field: grid mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = trace_against(a.at(i), b.at(i));
  return ScalarField(a.grid(), std::move(out));
}

ScalarField operator_L(const ScalarField& v, const HermitianField& theta) {
  if (!same_grid(v.grid(), theta.grid())) throw InvalidArgument("operator_L: grid mismatch");
  std::vector<double> out(v.size(), 0.0);
  if (v.on_torus()) {
    geometry::SpectralOperator spectral(std::get<std::shared_ptr<const geometry::TorusGrid>>(v.grid()));
    spectral.load(v.values());
    spectral.contract_hessian(theta, out);
  } else {
    const auto& ball = v.ball();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (ball.kind(i) != geometry::NodeKind::interior) continue;
      out[i] = contract(theta.at(i), geometry::complex_hessian_at(v, i));
    }
  }
  return ScalarField(v.grid(), std::move(out));
}

}  // namespace qmalab::pointalg
