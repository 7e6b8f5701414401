#include "qmalab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace qmalab::cli {

namespace {

using geometry::ComplexStructureJ;
using geometry::HermitianField;

constexpr double kMargin = 0.1;

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Standard J, or with break_j a copy whose matrix is no longer antisymmetric.
Matrix j_matrix(int m, const VerifyOptions& options) {
  Matrix j = ComplexStructureJ::standard(m).matrix();
  if (options.break_j) j(0, 1) += 0.5;
  return j;
}

RealMatrix random_symmetric(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal;
  RealMatrix a(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) a(r, c) = normal(rng);
  }
  return 0.5 * (a + a.transpose());
}

double min_eigenvalue(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// Scales `dir` so that min eig(base + a dir) >= margin, starting from a = 1.
Matrix shrink_into_cone(const Matrix& base, const Matrix& dir, double margin) {
  double a = 1.0;
  while (min_eigenvalue(base + a * dir) < margin) a *= 0.5;
  return base + a * dir;
}

// Random trigonometric potential scaled into the given cone with margin kMargin.
ScalarField random_cone_potential(const std::shared_ptr<const TorusGrid>& grid, std::uint64_t seed,
                                  pointalg::ConeKind kind, const HermitianField& g, const ComplexStructureJ& J) {
  ScalarField phi = trig_field(grid, seed, 3, 1);
  for (int it = 0; it < 60; ++it) {
    if (pointalg::cone_check(kind, phi, g, &g, J).margin >= kMargin) return phi;
    for (double& v : phi.values()) v *= 0.5;
  }
  throw std::runtime_error("random_cone_potential: no admissible amplitude");
}

SuiteResult trimmed(SuiteResult r) {
  while (!r.detail.empty() && (r.detail.back() == ' ' || r.detail.back() == ';')) r.detail.pop_back();
  return r;
}

struct Worst {
  double value = -std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  void update(double v, std::uint64_t s) {
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    if (v > value) {
      value = v;
      seed = s;
    }
  }
};

}  // namespace

Matrix random_g_tilde(std::mt19937_64& rng, int m, double margin, const Matrix& j) {
  const int n = 2 * m;
  const Matrix H = geometry::twist(geometry::complex_from_real_hessian(random_symmetric(rng, 2 * n)), j);
  return shrink_into_cone(Matrix::Identity(n, n), H, margin);
}

Matrix random_g_hat(std::mt19937_64& rng, int m, double margin, const Matrix& j) {
  const int n = 2 * m;
  const Matrix id = Matrix::Identity(n, n);
  const Matrix H = geometry::twist(geometry::complex_from_real_hessian(random_symmetric(rng, 2 * n)), j);
  return shrink_into_cone(id, pointalg::g_hat_point(id, id, H) - id, margin);
}

SuiteResult suite_complex_structure(const VerifyOptions& options) {
  SuiteResult r{"complex_structure", true, 0.0, ""};
  for (int m : {1, 2}) {
    const auto d = ComplexStructureJ::unchecked(j_matrix(m, options)).defects();
    const double worst = std::max({d.unitarity, d.square, d.antisymmetry});
    r.value = std::max(r.value, worst);
    if (worst > 1e-12) {
      r.passed = false;
      const char* name = d.antisymmetry > 1e-12 ? "antisymmetry J^T = -J" : d.square > 1e-12 ? "J conj(J) = -I" : "unitarity";
      r.detail += format("m=%d violates J invariant %s (defect %.3e); ", m, name, worst);
    }
  }
  if (r.passed) r.detail = "standard J is unitary, antisymmetric and squares to -1 for m = 1, 2";
  return trimmed(std::move(r));
}

SuiteResult suite_det_identity(const VerifyOptions& options) {
  Worst worst;
  for (int m : {1, 2}) {
    const Matrix j = j_matrix(m, options);
    const Matrix id = Matrix::Identity(2 * m, 2 * m);
    for (int i = 0; i < options.instances; ++i) {
      const std::uint64_t seed = options.seed + 2 * static_cast<std::uint64_t>(i) + (m - 1);
      std::mt19937_64 rng(seed);
      const Matrix gt = random_g_tilde(rng, m, kMargin, j);
      const double F = std::log(pointalg::hermitian_det(gt));
      worst.update(std::abs(pointalg::det_identity_residual_point(gt, id, j, F)), seed);
    }
  }
  const bool ok = worst.value < 1e-8;
  return {"det_identity", ok, worst.value,
          format("max |det(Theta~) det(g~) - 1| = %.3e over %d instances per m (worst seed %llu), threshold 1e-8",
                 worst.value, options.instances, static_cast<unsigned long long>(worst.seed))};
}

SuiteResult suite_det_identity_negative(const VerifyOptions& options) {
  Worst worst;
  for (int m : {1, 2}) {
    const int n = 2 * m;
    const Matrix j = j_matrix(m, options);
    const Matrix id = Matrix::Identity(n, n);
    for (int i = 0; i < options.instances; ++i) {
      const std::uint64_t seed = options.seed + 2 * static_cast<std::uint64_t>(i) + (m - 1);
      std::mt19937_64 rng(seed);
      // Generic Hermitian perturbation without the J pairing.
      std::normal_distribution<double> normal;
      Matrix a(n, n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) a(r, c) = Complex(normal(rng), normal(rng));
      }
      const Matrix gt = shrink_into_cone(id, 0.5 * (a + a.adjoint()), kMargin);
      worst.update(std::abs(pointalg::det_identity_residual_point(gt, id, j, std::log(pointalg::hermitian_det(gt)))),
                   seed);
    }
  }
  const bool ok = worst.value > 1e-2;
  return {"det_identity_negative_control", ok, worst.value,
          format("max residual without q-real pairing = %.3e, expected > 1e-2", worst.value)};
}

SuiteResult suite_det_inequality(const VerifyOptions& options) {
  double min_gap4 = std::numeric_limits<double>::infinity();
  Worst gap2;
  std::uint64_t worst4 = 0;
  for (int m : {1, 2}) {
    const Matrix j = j_matrix(m, options);
    const Matrix id = Matrix::Identity(2 * m, 2 * m);
    for (int i = 0; i < options.instances; ++i) {
      const std::uint64_t seed = options.seed + 2 * static_cast<std::uint64_t>(i) + (m - 1);
      std::mt19937_64 rng(seed);
      const Matrix gh = random_g_hat(rng, m, kMargin, j);
      const double gap = pointalg::det_inequality_gap_point(gh, id, j, std::log(pointalg::hermitian_det(gh)));
      if (m == 1) {
        gap2.update(std::abs(gap), seed);
      } else if (!(gap >= min_gap4)) {
        min_gap4 = gap;
        worst4 = seed;
      }
    }
  }
  const bool ok = min_gap4 >= -1e-10 && gap2.value <= 1e-10;
  return {"det_inequality", ok, min_gap4,
          format("n=4 min gap %.3e (seed %llu, threshold -1e-10); n=2 max |gap| %.3e (threshold 1e-10)", min_gap4,
                 static_cast<unsigned long long>(worst4), gap2.value)};
}

SuiteResult suite_operator_identities(const VerifyOptions& options) {
  Worst worst;
  for (int m : {1, 2}) {
    const auto grid = std::make_shared<const TorusGrid>(m, m == 1 ? 8 : 4, 1.0);
    const int n = grid->n();
    const HermitianField id = HermitianField::constant(grid, Matrix::Identity(n, n));
    const auto J = ComplexStructureJ::unchecked(j_matrix(m, options));
    // A res-4 grid at m = 2 already has 4^8 nodes.
    const int count = std::max(1, std::min(options.instances, m == 1 ? 20 : 2));
    for (int i = 0; i < count; ++i) {
      const std::uint64_t seed = options.seed + 2 * static_cast<std::uint64_t>(i) + (m - 1);
      const ScalarField phi = random_cone_potential(grid, seed, pointalg::ConeKind::psh_j, id, J);
      const HermitianField gt = pointalg::g_tilde(id, phi, J);
      const ScalarField lhs = pointalg::operator_L(phi, pointalg::theta_tilde(gt, J));
      const ScalarField tr = pointalg::trace_field(gt, id);
      const ScalarField psi = random_cone_potential(grid, seed, pointalg::ConeKind::psh_j_n1, id, J);
      const HermitianField gh = pointalg::g_hat(id, id, psi, J);
      const ScalarField lhs2 = pointalg::operator_L(psi, pointalg::theta_hat(gh, id, J));
      const ScalarField tr2 = pointalg::trace_field(gh, id);
      double err = 0.0;
      for (std::size_t k = 0; k < lhs.size(); ++k) {
        err = std::max({err, std::abs(lhs[k] - (n - tr[k])), std::abs(lhs2[k] - (n - tr2[k]))});
      }
      worst.update(err, seed);
    }
  }
  const bool ok = worst.value < 1e-8;
  return {"operator_identities", ok, worst.value,
          format("max |L(phi) - (n - tr_g~ g)|, |L^(psi) - (n - tr_g^ h)| = %.3e (worst seed %llu), threshold 1e-8",
                 worst.value, static_cast<unsigned long long>(worst.seed))};
}

SuiteResult suite_cone(const VerifyOptions& options) {
  const auto grid = std::make_shared<const TorusGrid>(1, 8, 1.0);
  const HermitianField id = HermitianField::constant(grid, Matrix::Identity(2, 2));
  const auto J = ComplexStructureJ::unchecked(j_matrix(1, options));
  std::string detail;
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (auto kind : {pointalg::ConeKind::psh_j, pointalg::ConeKind::psh_j_n1}) {
    const auto zero = pointalg::cone_check(kind, ScalarField::zeros(grid), id, &id, J);
    if (!zero.member || std::abs(zero.margin - 1.0) > 1e-12) {
      ok = false;
      detail += format("zero potential margin %.6f != 1; ", zero.margin);
    }
    const ScalarField steep = ScalarField::from_function(
        grid, [](const Point& x) { return -10.0 * std::cos(2.0 * std::numbers::pi * x[1]); });
    const auto bad = pointalg::cone_check(kind, steep, id, &id, J);
    if (bad.member || bad.margin >= 0.0) {
      ok = false;
      detail += format("-10 cos(2 pi x_1) accepted (margin %.3e); ", bad.margin);
    }
    for (int i = 0; i < 10; ++i) {
      const ScalarField phi = random_cone_potential(grid, options.seed + i, kind, id, J);
      const auto res = pointalg::cone_check(kind, phi, id, &id, J);
      worst = std::min(worst, res.margin);
      if (!res.member) {
        ok = false;
        detail += format("random potential seed %llu rejected; ", static_cast<unsigned long long>(options.seed + i));
      }
    }
  }
  if (ok) detail = format("zero potential margin 1, steep potential rejected, min random margin %.3e", worst);
  return trimmed({"cone_membership", ok, worst, detail});
}

SuiteResult suite_positivity(const VerifyOptions& options) {
  const auto grid = std::make_shared<const TorusGrid>(1, 8, 1.0);
  const HermitianField id = HermitianField::constant(grid, Matrix::Identity(2, 2));
  const auto J = ComplexStructureJ::unchecked(j_matrix(1, options));
  double worst = std::numeric_limits<double>::infinity();
  std::uint64_t worst_seed = options.seed;
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t seed = options.seed + i;
    const ScalarField psi = random_cone_potential(grid, seed, pointalg::ConeKind::psh_j_n1, id, J);
    const double v = pointalg::laplace_positivity_check(psi, id, id, J);
    if (v < worst) {
      worst = v;
      worst_seed = seed;
    }
  }
  const bool ok = worst > 0.0;
  return {"laplacian_positivity", ok, worst,
          format("min tr_g h + Delta_g psi over 20 potentials = %.3e (seed %llu), expected > 0", worst,
                 static_cast<unsigned long long>(worst_seed))};
}

SuiteResult suite_young(const VerifyOptions&) {
  double worst = std::numeric_limits<double>::infinity();
  std::string detail;
  std::vector<double> xs;
  for (int i = 0; i <= 5000; ++i) xs.push_back(50.0 * i / 5000.0);
  for (double p : {3.0, 4.0, 6.0}) {
    const auto c = harness::measure_young_constants(p);
    double young = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 500; ++a) {
      for (int b = 0; b <= 500; ++b) {
        const double v = 0.1 * a, F = 0.1 * b;
        // Relative margin: both sides grow like e^{50}.
        const double scale = std::exp(F) * std::pow(1.0 + F, p) + c.C_p * std::exp(v);
        young = std::min(young, harness::young_margin(v, F, p, c.C_p) / scale);
      }
    }
    const double power = harness::power_bound_margin(p, c.C_p_prime, xs);
    worst = std::min({worst, young, power});
    detail += format("p=%g: C_p=%.6f C'_p=%.6f young %.3e power %.3e; ", p, c.C_p, c.C_p_prime, young, power);
  }
  return trimmed({"young_constants", worst >= 0.0, worst, detail});
}

std::vector<SuiteResult> run_verify(const VerifyOptions& options) {
  return {suite_complex_structure(options), suite_det_identity(options),  suite_det_identity_negative(options),
          suite_det_inequality(options),           suite_operator_identities(options),  suite_cone(options),
          suite_positivity(options),        suite_young(options)};
}

}  // namespace qmalab::cli
