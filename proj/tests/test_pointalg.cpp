#include "qmalab/pointalg.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qmalab;
using namespace qmalab::pointalg;
using geometry::TorusGrid;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix random_twisted(std::mt19937_64& rng, int m, double scale) {
  std::normal_distribution<double> normal;
  RealMatrix d(4 * m, 4 * m);
  for (int r = 0; r < 4 * m; ++r) {
    for (int c = 0; c < 4 * m; ++c) d(r, c) = normal(rng);
  }
  const RealMatrix sym = 0.5 * (d + d.transpose()) * scale;
  return geometry::twist(geometry::complex_from_real_hessian(sym), ComplexStructureJ::standard(m).matrix());
}

double min_eig(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST_CASE("theta_hat in diagonal form") {
  const std::vector<double> mu{1.0, 2.0, 3.0, 4.0};
  const auto th = theta_hat_diagonal(mu);
  CHECK(th[0] == doctest::Approx(13.0 / 36.0));
  CHECK(th[1] == doctest::Approx(19.0 / 36.0));
  CHECK(th[2] == doctest::Approx(21.0 / 36.0));
  CHECK(th[3] == doctest::Approx(22.0 / 36.0));
  // det(Theta^) - 1/det(g^) for g = Id, g^ = diag(1, 2, 3, 4).
  const double gap = th[0] * th[1] * th[2] * th[3] - 1.0 / 24.0;
  CHECK(gap == doctest::Approx(114114.0 / 1679616.0 - 1.0 / 24.0).epsilon(1e-12));
  CHECK(gap > 0.0);
}

TEST_CASE("theta_hat of a J-paired diagonal metric matches the diagonal form") {
  const auto J = ComplexStructureJ::standard(2).matrix();
  Matrix gh = Matrix::Zero(4, 4);
  const std::vector<double> mu{1.5, 1.5, 3.0, 3.0};
  for (int i = 0; i < 4; ++i) gh(i, i) = mu[i];
  const Matrix th = theta_hat_point(gh, Matrix::Identity(4, 4), J);
  const auto diag = theta_hat_diagonal(mu);
  for (int i = 0; i < 4; ++i) CHECK(th(i, i).real() == doctest::Approx(diag[i]));
  CHECK((th - th.diagonal().asDiagonal().toDenseMatrix()).norm() < 1e-14);
}

TEST_CASE("theta_tilde is homogeneous of degree -1") {
  std::mt19937_64 rng(1);
  const auto J = ComplexStructureJ::standard(2).matrix();
  Matrix gt = Matrix::Identity(4, 4) + random_twisted(rng, 2, 0.05);
  REQUIRE(min_eig(gt) > 0.1);
  for (double c : {0.5, 3.0, 17.0}) {
    CHECK((theta_tilde_point(c * gt, J) - theta_tilde_point(gt, J) / c).norm() < 1e-14);
  }
}

TEST_CASE("Determinant identity on q-real metrics, failure without the pairing") {
  std::mt19937_64 rng(7);
  for (int m : {1, 2}) {
    const auto J = ComplexStructureJ::standard(m).matrix();
    const Matrix id = Matrix::Identity(2 * m, 2 * m);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Matrix gt = id + random_twisted(rng, m, 0.1);
      if (min_eig(gt) < 0.1) continue;
      worst = std::max(worst, std::abs(det_identity_residual_point(gt, id, J, std::log(hermitian_det(gt)))));
    }
    CHECK(worst < 1e-10);
  }
  const auto J = ComplexStructureJ::standard(1).matrix();
  Matrix generic(2, 2);
  generic << 1.0, Complex(0.3, 0.2), Complex(0.3, -0.2), 2.0;
  CHECK(std::abs(det_identity_residual_point(generic, Matrix::Identity(2, 2), J, std::log(hermitian_det(generic)))) >
        1e-2);
}

TEST_CASE("Determinant inequality: equality at n = 2, strict at n = 4") {
  std::mt19937_64 rng(9);
  for (int m : {1, 2}) {
    const auto J = ComplexStructureJ::standard(m).matrix();
    const Matrix id = Matrix::Identity(2 * m, 2 * m);
    for (int i = 0; i < 200; ++i) {
      const Matrix gh = g_hat_point(id, id, random_twisted(rng, m, 0.05));
      if (min_eig(gh) < 0.1) continue;
      const double gap = det_inequality_gap_point(gh, id, J, std::log(hermitian_det(gh)));
      if (m == 1) {
        CHECK(std::abs(gap) < 1e-12);
      } else {
        CHECK(gap >= -1e-12);
      }
    }
  }
  // All eigenvalues equal: equality in every dimension.
  const auto J = ComplexStructureJ::standard(2).matrix();
  const Matrix scalar = 2.0 * Matrix::Identity(4, 4);
  CHECK(std::abs(det_inequality_gap_point(scalar, Matrix::Identity(4, 4), J, std::log(16.0))) < 1e-14);
}

TEST_CASE("Operator identities on trigonometric potentials") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  const auto phi = geometry::ScalarField::from_function(model.grid, [](const Point& x) {
    return 0.02 * std::cos(2 * kPi * x[0]) * std::sin(2 * kPi * x[2]) + 0.01 * std::cos(2 * kPi * (x[1] - x[3]));
  });
  const HermitianField gt = g_tilde(model.g, phi, model.J);
  const ScalarField L = operator_L(phi, theta_tilde(gt, model.J));
  const ScalarField tr = trace_field(gt, model.g);
  const HermitianField gh = g_hat(model.g, model.g, phi, model.J);
  const ScalarField Lh = operator_L(phi, theta_hat(gh, model.g, model.J));
  const ScalarField trh = trace_field(gh, model.g);
  double err = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) {
    err = std::max({err, std::abs(L[i] - (2.0 - tr[i])), std::abs(Lh[i] - (2.0 - trh[i]))});
  }
  CHECK(err < 1e-10);
  // Constant v: L v = 0. Linearity in v.
  const ScalarField c = ScalarField::constant(model.grid, 3.0);
  const auto theta = theta_tilde(gt, model.J);
  const ScalarField Lc = operator_L(c, theta);
  CHECK(std::max(std::abs(Lc.max()), std::abs(Lc.min())) < 1e-12);
  std::vector<double> sum(phi.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = 2.0 * phi[i] + 0.5 * std::sin(2 * kPi * phi.torus().coordinates(i)[3]);
  const ScalarField other = ScalarField::from_function(model.grid, [](const Point& x) { return std::sin(2 * kPi * x[3]); });
  const ScalarField lhs = operator_L(ScalarField(model.grid, sum), theta);
  const ScalarField a = operator_L(phi, theta), b = operator_L(other, theta);
  double lin = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i) lin = std::max(lin, std::abs(lhs[i] - 2.0 * a[i] - 0.5 * b[i]));
  CHECK(lin < 1e-10);
}

TEST_CASE("cone membership") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  for (auto kind : {ConeKind::psh_j, ConeKind::psh_j_n1}) {
    const auto zero = cone_check(kind, ScalarField::zeros(model.grid), model.g, &model.g, model.J);
    CHECK(zero.member);
    CHECK(zero.margin == doctest::Approx(1.0));
    // -A cos(2 pi x_1): twisted Hessian (A pi^2 / 2) cos(2 pi x_1) Id, margin 1 - A pi^2 / 2.
    for (double A : {0.1, 1.0}) {
      const ScalarField phi =
          ScalarField::from_function(model.grid, [A](const Point& x) { return -A * std::cos(2 * kPi * x[1]); });
      const auto res = cone_check(kind, phi, model.g, &model.g, model.J);
      CHECK(res.margin == doctest::Approx(1.0 - A * kPi * kPi / 2.0));
      CHECK(res.member == (A < 0.2));
    }
  }
  CHECK_THROWS_AS(cone_check(ConeKind::psh_j_n1, ScalarField::zeros(model.grid), model.g, nullptr, model.J),
                  InvalidArgument);
}

TEST_CASE("Laplacian positivity inside the cone") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  const ScalarField psi = ScalarField::from_function(
      model.grid, [](const Point& x) { return 0.05 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[3]); });
  REQUIRE(cone_check(ConeKind::psh_j_n1, psi, model.g, &model.g, model.J).member);
  CHECK(laplace_positivity_check(psi, model.g, model.g, model.J) > 0.0);
}

TEST_CASE("log det ratio and trace fields") {
  const auto model = geometry::make_flat_model(1, 4, 1.0);
  const HermitianField two = HermitianField::constant(model.grid, 2.0 * Matrix::Identity(2, 2));
  CHECK(log_det_ratio(two, model.g)[5] == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(trace_field(two, model.g)[5] == doctest::Approx(1.0));
}
