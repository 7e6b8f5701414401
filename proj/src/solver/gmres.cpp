#include "gmres.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace qmalab::solver::detail {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GmresResult gmres(const LinearMap& apply, const LinearMap& precondition, std::span<const double> rhs,
                  std::span<double> x, int restart, int max_iter, double rel_tol) {
  const std::size_t size = rhs.size();
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  GmresResult result;
  if (rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }

  std::vector<std::vector<double>> basis(restart + 1, std::vector<double>(size));
  std::vector<double> r(size), w(size), z(size);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(restart + 1, restart);
  std::vector<double> cs(restart), sn(restart), g(restart + 1);

  while (result.iterations < max_iter) {
    apply(x, r);
    for (std::size_t i = 0; i < size; ++i) r[i] = rhs[i] - r[i];
    double beta = std::sqrt(dot(r, r));
    result.relative_residual = beta / rhs_norm;
    if (result.relative_residual <= rel_tol) {
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < size; ++i) basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < restart && result.iterations < max_iter; ++k, ++result.iterations) {
      precondition(basis[k], z);
      apply(z, w);
      // Modified Gram-Schmidt.
      for (int j = 0; j <= k; ++j) {
        hess(j, k) = dot(w, basis[j]);
        for (std::size_t i = 0; i < size; ++i) w[i] -= hess(j, k) * basis[j][i];
      }
      hess(k + 1, k) = std::sqrt(dot(w, w));
      if (hess(k + 1, k) > 0.0) {
        for (std::size_t i = 0; i < size; ++i) basis[k + 1][i] = w[i] / hess(k + 1, k);
      }
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * hess(j, k) + sn[j] * hess(j + 1, k);
        hess(j + 1, k) = -sn[j] * hess(j, k) + cs[j] * hess(j + 1, k);
        hess(j, k) = t;
      }
      const double denom = std::hypot(hess(k, k), hess(k + 1, k));
      cs[k] = hess(k, k) / denom;
      sn[k] = hess(k + 1, k) / denom;
      hess(k, k) = denom;
      hess(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      result.relative_residual = std::abs(g[k + 1]) / rhs_norm;
      if (result.relative_residual <= rel_tol) {
        ++k;
        ++result.iterations;
        break;
      }
    }

    // Back substitution and update x += M^{-1} V y.
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= hess(i, j) * y[j];
      y[i] = s / hess(i, i);
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < size; ++i) w[i] += y[j] * basis[j][i];
    }
    precondition(w, z);
    for (std::size_t i = 0; i < size; ++i) x[i] += z[i];
    if (result.relative_residual <= rel_tol) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

}  // namespace qmalab::solver::detail
