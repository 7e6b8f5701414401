#include "qmalab/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace qmalab;
using namespace qmalab::harness;
using geometry::NodeKind;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::shared_ptr<const BallGrid> unit_ball(int half = 6) {
  return std::make_shared<const BallGrid>(2, Point(4, 0.0), 0.5, 0.5 / half);
}

}  // namespace

TEST_CASE("entropy norm and L1 estimate of constants") {
  const auto g = std::make_shared<const geometry::TorusGrid>(1, 4, 1.0);
  CHECK(entropy_norm(ScalarField::zeros(g), 4.0) == doctest::Approx(1.0));
  CHECK(entropy_norm(ScalarField::constant(g, -2.0), 4.0) == doctest::Approx(std::exp(-2.0) * 81.0));
  CHECK(l1_estimate(ScalarField::constant(g, -0.3)) == doctest::Approx(0.3));
}

TEST_CASE("constants for scalar metrics") {
  const auto ball = unit_ball(3);
  CHECK(choose_constants(HermitianField::constant(ball, Matrix::Identity(2, 2)), 2).c0 == doctest::Approx(0.45));
  const auto two = choose_constants(HermitianField::constant(ball, 2.0 * Matrix::Identity(2, 2)), 2);
  CHECK(two.c0 == doctest::Approx(0.225));
  CHECK(two.C0 == doctest::Approx(2.0));
}

TEST_CASE("delta0 and the comparison constant") {
  CHECK(delta0(4.0, 2) == doctest::Approx(0.25));
  CHECK_THROWS_AS(delta0(2.0, 2), InvalidArgument);
  CHECK(comparison_epsilon(1.0, 2) == doctest::Approx(std::pow(1.5, 2.0 / 3.0)));
  CHECK(comparison_epsilon(1.0, 2) == doctest::Approx(1.31037).epsilon(1e-5));
}

TEST_CASE("sublevel statistics of a paraboloid match a brute-force count") {
  const auto ball = unit_ball();
  const ScalarField zero = ScalarField::zeros(ball);
  const SublevelProblem problem(zero, zero, 0.45);
  const double min_boundary = [&] {
    double r = 1e9;
    for (std::size_t i = 0; i < ball->node_count(); ++i) {
      if (ball->kind(i) == NodeKind::boundary) r = std::min(r, std::sqrt(ball->distance2(i)));
    }
    return r;
  }();
  CHECK(problem.r0() == doctest::Approx(0.5 * min_boundary));
  CHECK(problem.S() == doctest::Approx(0.45 * min_boundary * min_boundary));

  const double cell = ball->cell_volume();
  for (double s : default_s_grid(problem.S(), 8)) {
    double phi = 0.0, a = 0.0;
    for (std::size_t i = 0; i < ball->node_count(); ++i) {
      const double v = 0.45 * ball->distance2(i) - s;
      if (ball->in_closed_ball(i) && v < 0.0) {
        phi += cell;
        a += -v * cell;
      }
    }
    CHECK(problem.Phi(s) == doctest::Approx(phi));
    CHECK(problem.A(s) == doctest::Approx(a));
    CHECK(problem.boundary_min(s) > 0.0);
    CHECK(problem.A_k(s, 64) >= problem.A(s));
    CHECK(problem.A_k(s, 64) < problem.A_k(s, 4));
  }
}

TEST_CASE("Phi-A inequality holds on every sample") {
  const auto ball = unit_ball();
  const ScalarField psi = ScalarField::from_function(ball, [](const Point& x) {
    return -0.1 + 0.05 * std::sin(5.0 * x[0]) * std::cos(3.0 * x[3]) + 0.2 * (x[1] * x[1]);
  });
  const ScalarField F = ScalarField::from_function(ball, [](const Point& x) { return std::cos(4.0 * x[2]); });
  const SublevelProblem problem(psi, F, 0.45);
  const auto grid = default_s_grid(problem.S());
  CHECK(grid.size() == 32);
  CHECK(grid.front() == doctest::Approx(0.01 * problem.S()));
  CHECK(grid.back() == doctest::Approx(0.99 * problem.S()));
  const auto samples = phi_a_samples(problem, grid);
  CHECK(samples.size() == 64);
  for (const auto& s : samples) CHECK(s.margin() >= -1e-10);
  CHECK_THROWS_AS(sublevel_scan(problem, {problem.S() * 1.5}), InvalidArgument);
}

TEST_CASE("comparison check on constant fields") {
  const auto ball = unit_ball(3);
  std::vector<double> a(ball->node_count(), 0.0), b(ball->node_count(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ball->kind(i) == NodeKind::interior) {
      a[i] = -1.0;
      b[i] = -1.0;
    }
  }
  const auto r = comparison_check(ScalarField(ball, a), ScalarField(ball, b), 1.0, 2);
  CHECK(r.eps == doctest::Approx(std::pow(1.5, 2.0 / 3.0)));
  CHECK(r.margin == doctest::Approx(0.0));  // attained on boundary nodes where both vanish
  CHECK(ball->kind(r.worst_node) != NodeKind::interior);
}

TEST_CASE("integrability scans") {
  const auto ball = unit_ball(3);
  const ScalarField zero = ScalarField::zeros(ball);
  const double vol = static_cast<double>(ball->node_count() - ball->count(NodeKind::exterior)) * ball->cell_volume();
  const auto scan = alpha_scan(zero, {0.0, 1.0, 2.0}, 2.0 * vol);
  CHECK(scan.empirical == 2.0);
  CHECK(scan.table[1].second == doctest::Approx(vol));

  const ScalarField psi = ScalarField::from_function(ball, [](const Point& x) { return x[0] - 0.2; });
  const ScalarField U = trudinger_field(psi, 4.0, 2);
  for (std::size_t i = 0; i < U.size(); ++i) {
    const double expect = psi[i] < 0.0 ? std::pow(-psi[i], 1.5) / 2.0 : 0.0;
    CHECK(U[i] == doctest::Approx(expect));
  }
  const auto tr = trudinger_check(psi, 4.0, 2, {0.0, 1.0, 1e6}, 1e-2);
  CHECK(tr.table.size() == 3);
  CHECK(tr.table[2].second > tr.table[1].second);
}

TEST_CASE("Young constants agree with an independent optimiser") {
  // Reference values from a two-dimensional Nelder-Mead maximisation.
  const std::vector<std::pair<double, double>> ref{{3.0, 0.147921235537}, {4.0, 0.491328712928}, {6.0, 11.5739650752}};
  for (const auto& [p, Cp] : ref) {
    const auto c = measure_young_constants(p);
    CHECK(c.C_p == doctest::Approx(Cp).epsilon(1e-8));
    CHECK(c.C_p_prime == doctest::Approx(p - 1.0).epsilon(1e-9));
    std::vector<double> xs;
    for (int i = 0; i <= 2000; ++i) xs.push_back(0.025 * i);
    CHECK(power_bound_margin(p, c.C_p_prime, xs) >= 0.0);
    double worst = 1.0;
    for (double v = 0.0; v <= 50.0; v += 0.25) {
      for (double F = -5.0; F <= 50.0; F += 0.25) worst = std::min(worst, young_margin(v, F, p, c.C_p));
    }
    CHECK(worst >= 0.0);
  }
  const auto ball = unit_ball(2);
  CHECK_THROWS_AS(young_check(ScalarField::constant(ball, -1.0), ScalarField::zeros(ball), 4.0, 1.0),
                  InvalidArgument);
}

TEST_CASE("De Giorgi iteration on the equality profile") {
  const double S = 0.3, K = 2.5, d0 = 0.25;
  const double C4 = equality_profile_C4(K, d0, S);
  const auto Phi = [&](double s) { return s > 0.0 ? K * std::pow(s / S, 1.0 / d0) : 0.0; };
  const auto r = degiorgi_iterate(C4, d0, Phi, S);
  REQUIRE(r.converged);
  CHECK(!r.violation);
  CHECK(r.c1 == doctest::Approx(K).epsilon(0.05));

  // Brute-force sequence oracle.
  double s = S, rho = 0.0;
  for (std::size_t j = 0; j + 1 < r.levels.size(); ++j) {
    rho += std::pow(Phi(s) / Phi(S), d0);
    s -= 2.0 * C4 * std::pow(Phi(s), d0);
    CHECK(r.levels[j + 1] == doctest::Approx(s));
  }
  CHECK(r.c1 == doctest::Approx(std::pow(S / (2.0 * C4 * rho), 1.0 / d0)).epsilon(1e-12));
}

TEST_CASE("De Giorgi iteration reports hypothesis violations") {
  const auto Phi = [](double s) { return s > 0.05 ? 1.0 : 1e-3; };
  const auto r = degiorgi_iterate(1e-3, 0.25, Phi, 0.1);
  CHECK(r.violation.has_value());
  CHECK(!r.converged);
}

TEST_CASE("certificate") {
  CertificateInput in{1.0, 0.05, 0.01, 60.0, 0.1, 0.49, 3.0, 4.0};
  const auto small = certify_bound(in);
  CHECK(small.vacuous);
  CHECK(small.holds);
  CHECK(std::log(in.sup_abs_psi) <= small.log_implied_bound);

  in.c1 = 5.0;
  in.sup_abs_psi = 3.0;
  const auto c = certify_bound(in);
  CHECK(!c.vacuous);
  CHECK(c.holds == (c.lhs <= c.rhs));
  // lhs == rhs at the implied bound.
  CertificateInput at = in;
  at.sup_abs_psi = c.implied_bound;
  const auto edge = certify_bound(at);
  CHECK(edge.lhs == doctest::Approx(edge.rhs).epsilon(1e-8));
  // Nondecreasing in the entropy.
  double prev = 0.0;
  for (double e : {10.0, 20.0, 40.0, 80.0}) {
    in.entropy = e;
    const double b = certify_bound(in).log_implied_bound;
    CHECK(b >= prev);
    prev = b;
  }
  in.c1 = 0.0;
  CHECK_THROWS_AS(certify_bound(in), InvalidArgument);
}

TEST_CASE("CSV round-trip and column errors") {
  const auto dir = std::filesystem::temp_directory_path() / "qmalab_csv_test";
  std::filesystem::create_directories(dir);
  const Table t{{"s", "A_s"}, {{0.1, 1e-300}, {2.5, -3.0}}};
  write_csv(dir / "t.csv", t);
  const Table back = read_csv(dir / "t.csv");
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  std::ofstream(dir / "bad.csv") << "s,A_s\n0.1,oops\n";
  try {
    read_csv(dir / "bad.csv");
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("A_s") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("full experiment on a small torus") {
  const auto grid = std::make_shared<const geometry::TorusGrid>(1, 8, 1.0);
  const ScalarField F = ScalarField::from_function(grid, [](const Point& x) {
    return 0.5 * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]) + 0.3 * std::cos(kTwoPi * (x[2] - x[3]));
  });
  ExperimentConfig cfg;
  cfg.ball_half_width = 3;
  cfg.comparison_s_count = 2;
  cfg.k_values = {4};
  const auto rec = run_experiment(cfg, F);
  CHECK(rec.sup_abs_psi == doctest::Approx(-rec.solve.potential.min()));
  CHECK(rec.ledger.c0 == doctest::Approx(0.45));
  CHECK(rec.ledger.delta0 == doctest::Approx(0.25));
  CHECK(rec.ledger.C4 > 0.0);
  CHECK(rec.ledger.c1 > 0.0);
  CHECK(rec.certificate.vacuous);
  CHECK(rec.comparison.size() == 2);
  for (const auto& r : rec.comparison) CHECK(r.comparison_margin >= -1e-4);
  for (const auto& s : rec.phi_a) CHECK(s.margin() >= -1e-10);

  const auto dir = std::filesystem::temp_directory_path() / "qmalab_experiment_test";
  std::filesystem::remove_all(dir);
  write_experiment(dir, rec);
  const Table summary = read_csv(dir / "summary.csv");
  for (const char* col : {"C4", "c1", "entropy_p", "sup_abs_psi", "implied_bound"}) {
    CHECK(std::find(summary.columns.begin(), summary.columns.end(), col) != summary.columns.end());
  }
  const Table cmp = read_csv(dir / "comparison.csv");
  CHECK(cmp.rows.size() == 2);
  CHECK(read_csv(dir / "phi_a.csv").rows.size() == 64);
  CHECK(std::filesystem::exists(dir / "solve" / "report.json"));
  std::filesystem::remove_all(dir);
}
