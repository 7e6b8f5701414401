#include "qmalab/pointalg.hpp"
#include "qmalab/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace qmalab;
using namespace qmalab::solver;
using geometry::BallGrid;
using geometry::NodeKind;
using geometry::ScalarField;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarField manufactured(const geometry::FlatModel& model) {
  return ScalarField::from_function(model.grid, [](const Point& x) {
    return 0.05 * std::cos(kTwoPi * x[1]) + 0.03 * std::sin(kTwoPi * (x[0] + x[2]));
  });
}

SolveReport solve(EquationKind kind, const geometry::FlatModel& model, const ScalarField& F,
                  const SolveOptions& opts = {}) {
  return kind == EquationKind::cma ? solve_cma_torus(F, model.g, model.J, opts)
                                   : solve_n1ma_torus(F, model.g, model.g, model.J, opts);
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  return err;
}

}  // namespace

TEST_CASE("equation kind names") {
  CHECK(std::string(to_string(EquationKind::cma)) == "cma");
  CHECK(equation_kind_from_string("n1ma") == EquationKind::n1ma);
  CHECK_THROWS_AS(equation_kind_from_string("ma"), InvalidArgument);
}

TEST_CASE("smoothing sequence") {
  const SmoothingSequence tau{16};
  CHECK(tau(0.0) == doctest::Approx(1.0 / 32.0));
  CHECK(tau(1.0) > 1.0);
  CHECK(tau(1.0) - 1.0 < 1e-3);
  CHECK(tau(-1.0) > 0.0);
  CHECK(tau(-1.0) < 1e-3);
  CHECK(SmoothingSequence{64}(-1.0) < tau(-1.0));
}

TEST_CASE("zero right-hand side gives the zero potential") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  for (auto kind : {EquationKind::cma, EquationKind::n1ma}) {
    const auto r = solve(kind, model, ScalarField::zeros(model.grid));
    CHECK(r.b == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::max(std::abs(r.potential.max()), std::abs(r.potential.min())) < 1e-12);
    CHECK(r.cone_margin == doctest::Approx(1.0));
  }
}

TEST_CASE("manufactured potentials are recovered") {
  const auto model = geometry::make_flat_model(1, 12, 1.0);
  const ScalarField phi = manufactured(model);
  const double top = phi.max();
  ScalarField shifted = phi;
  for (double& v : shifted.values()) v -= top;
  for (auto kind : {EquationKind::cma, EquationKind::n1ma}) {
    const ScalarField F = manufacture_rhs(kind, phi, model.g, &model.g, model.J);
    const auto r = solve(kind, model, F);
    CHECK(sup_diff(r.potential, shifted) < 1e-7);
    CHECK(std::abs(r.b) < 1e-8);
    CHECK(r.potential.max() == 0.0);
    REQUIRE(!r.residual_history.empty());
    CHECK(r.residual_history.back() <= 1e-8);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
      CHECK(r.residual_history[i] < r.residual_history[i - 1]);
    }
    CHECK(!r.continuation.empty());
    CHECK(r.continuation.back() == 1.0);
  }
}

TEST_CASE("adding a constant to F shifts b by the opposite constant") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  const ScalarField F = ScalarField::from_function(model.grid, [](const Point& x) {
    return 0.4 * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[3]);
  });
  ScalarField Fc = F;
  for (double& v : Fc.values()) v += 0.7;
  for (auto kind : {EquationKind::cma, EquationKind::n1ma}) {
    const auto a = solve(kind, model, F);
    const auto b = solve(kind, model, Fc);
    CHECK(b.b == doctest::Approx(a.b - 0.7).epsilon(1e-9));
    CHECK(sup_diff(a.potential, b.potential) < 1e-8);
  }
}

TEST_CASE("solution does not depend on the initial guess") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  const ScalarField F = ScalarField::from_function(model.grid, [](const Point& x) {
    return 0.8 * std::cos(kTwoPi * x[1]) + 0.3 * std::sin(kTwoPi * (x[0] - x[2]));
  });
  SolveOptions warm;
  warm.initial_guess = ScalarField::from_function(model.grid, [](const Point& x) {
    return 0.01 * std::cos(kTwoPi * x[2]);
  });
  const auto a = solve(EquationKind::n1ma, model, F);
  const auto b = solve(EquationKind::n1ma, model, F, warm);
  CHECK(sup_diff(a.potential, b.potential) < 1e-8);
  CHECK(a.b == doctest::Approx(b.b).epsilon(1e-9));
}

TEST_CASE("solved potential satisfies the operator identity") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  const ScalarField F = ScalarField::from_function(model.grid, [](const Point& x) {
    return std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[3]);
  });
  const auto r = solve(EquationKind::n1ma, model, F);
  const auto gh = pointalg::g_hat(model.g, model.g, r.potential, model.J);
  const auto L = pointalg::operator_L(r.potential, pointalg::theta_hat(gh, model.g, model.J));
  const auto tr = pointalg::trace_field(gh, model.g);
  double err = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) err = std::max(err, std::abs(L[i] - (2.0 - tr[i])));
  CHECK(err < 1e-6);
  CHECK(pointalg::cone_check(pointalg::ConeKind::psh_j_n1, r.potential, model.g, &model.g, model.J).member);
}

TEST_CASE("manufacture_rhs rejects potentials outside the cone") {
  const auto model = geometry::make_flat_model(1, 8, 1.0);
  const ScalarField steep =
      ScalarField::from_function(model.grid, [](const Point& x) { return -2.0 * std::cos(kTwoPi * x[1]); });
  CHECK_THROWS_AS(manufacture_rhs(EquationKind::cma, steep, model.g, nullptr, model.J), InvalidArgument);
}

TEST_CASE("report round-trip") {
  const auto model = geometry::make_flat_model(1, 4, 1.0);
  SolveReport r(ScalarField::from_function(model.grid, [](const Point& x) { return std::cos(kTwoPi * x[0]) - 1.0; }));
  r.b = -0.125;
  r.cone_margin = 0.5;
  r.iterations = 3;
  r.residual_history = {1e-2, 1e-6, 1e-12};
  r.continuation = {0.5, 1.0};
  const auto dir = std::filesystem::temp_directory_path() / "qmalab_report_roundtrip";
  std::filesystem::remove_all(dir);
  write_report(dir, r);
  const SolveReport back = read_report(dir);
  CHECK(back.b == r.b);
  CHECK(back.cone_margin == r.cone_margin);
  CHECK(back.iterations == r.iterations);
  CHECK(back.residual_history == r.residual_history);
  CHECK(back.continuation == r.continuation);
  CHECK(sup_diff(back.potential, r.potential) == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("Dirichlet problem with constant density converges to the radial solution at first order") {
  const double R = 0.5, c = 1.0;
  std::vector<double> errors;
  for (int half : {4, 6}) {
    const auto ball = std::make_shared<const BallGrid>(2, Point(4, 0.0), R, R / half);
    const auto sol = solve_dirichlet_ma_ball(ScalarField::constant(ball, c));
    CHECK(sol.residual <= 1e-6);
    CHECK(sol.potential.max() <= 0.0);
    CHECK(sol.min_hessian_eigenvalue > 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < ball->node_count(); ++i) {
      if (ball->kind(i) == NodeKind::interior) {
        err = std::max(err, std::abs(sol.potential[i] - std::sqrt(c) * (ball->distance2(i) - R * R)));
      } else {
        CHECK(sol.potential[i] == 0.0);
      }
    }
    errors.push_back(err);
  }
  CHECK(errors[0] < 0.1);
  CHECK(errors[1] < errors[0]);
  // err * (R / h) roughly constant.
  CHECK(errors[1] * 6.0 == doctest::Approx(errors[0] * 4.0).epsilon(0.2));
}

TEST_CASE("Dirichlet solutions are monotone in the density and vanish with it") {
  const auto ball = std::make_shared<const BallGrid>(2, Point(4, 0.0), 0.5, 0.125);
  const ScalarField lo = ScalarField::from_function(ball, [](const Point& x) { return 1.0 + 0.5 * std::sin(3.0 * x[0]); });
  ScalarField hi = lo;
  for (double& v : hi.values()) v *= 2.0;
  const auto a = solve_dirichlet_ma_ball(lo);
  const auto b = solve_dirichlet_ma_ball(hi);
  double worst = -1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) worst = std::max(worst, b.potential[i] - a.potential[i]);
  CHECK(worst <= 1e-12);
  const auto tiny = solve_dirichlet_ma_ball(ScalarField::constant(ball, 1e-8));
  CHECK(tiny.potential.min() > -1e-3);
  ScalarField neg = lo;
  neg[ball->node_count() / 2] = -1.0;
  CHECK_THROWS_AS(solve_dirichlet_ma_ball(neg), InvalidArgument);
}
