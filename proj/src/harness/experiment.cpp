#include "qmalab/field_io.hpp"
#include "qmalab/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace qmalab::harness {

using geometry::NodeKind;
using geometry::TorusGrid;

namespace {

std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= count; ++i) out.push_back(lo + i * step);
  return out;
}

// 0 followed by `per_decade` log-spaced points per decade on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> out{0.0};
  const int count = static_cast<int>(std::lround(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= count; ++i) out.push_back(lo * std::pow(10.0, double(i) / per_decade));
  return out;
}

double closed_ball_volume(const BallGrid& ball) {
  return static_cast<double>(ball.node_count() - ball.count(NodeKind::exterior)) * ball.cell_volume();
}

// Indices of `count` entries spread evenly over a grid of `size` entries.
std::vector<std::size_t> spread(std::size_t size, int count) {
  std::vector<std::size_t> out;
  if (size == 0 || count <= 0) return out;
  if (count == 1) return {size - 1};
  for (int j = 0; j < count; ++j) {
    const auto idx = static_cast<std::size_t>(std::lround(double(j) * (size - 1) / (count - 1)));
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

// min over beta of the gap between the alpha-integral at beta C_n and the
// Trudinger integral with A_k in place of A.
double trudinger_chain_margin(const ScalarField& psi_s, const ScalarField& psi_sk, double A_k, int n,
                              const std::vector<double>& betas) {
  const BallGrid& ball = psi_s.ball();
  const ScalarField U = trudinger_field(psi_s, A_k, n);
  const double Cn = (n + 1.0) / n;
  const double cell = ball.cell_volume();
  double worst = std::numeric_limits<double>::infinity();
  for (double beta : betas) {
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < U.size(); ++i) {
      if (!ball.in_closed_ball(i)) continue;
      rhs += std::exp(beta * Cn * std::max(0.0, -psi_sk[i])) * cell;
      if (psi_s[i] < 0.0) lhs += std::exp(beta * U[i]) * cell;
    }
    worst = std::min(worst, rhs - lhs);
  }
  return worst;
}

}  // namespace

solver::SolveReport solve_flat(const ExperimentConfig& config, const ScalarField& F) {
  if (!F.on_torus()) throw InvalidArgument("solve_flat: F must live on a torus grid");
  const TorusGrid& torus = F.torus();
  const int n = torus.n();
  const HermitianField g = HermitianField::constant(F.grid(), Matrix::Identity(n, n));
  const auto J = geometry::ComplexStructureJ::standard(torus.m());
  solver::SolveOptions opts;
  opts.tol = config.tol;
  opts.gmres_restart = config.gmres_restart;
  return config.kind == solver::EquationKind::cma ? solver::solve_cma_torus(F, g, J, opts)
                                                  : solver::solve_n1ma_torus(F, g, g, J, opts);
}

ExperimentRecord run_experiment(const ExperimentConfig& config, const ScalarField& F) {
  return measure_experiment(config, F, solve_flat(config, F));
}

ExperimentRecord measure_experiment(const ExperimentConfig& config, const ScalarField& F,
                                    solver::SolveReport solved) {
  if (!F.on_torus()) throw InvalidArgument("measure_experiment: F must live on a torus grid");
  if (!geometry::same_grid(F.grid(), solved.potential.grid())) {
    throw InvalidArgument("measure_experiment: F and the potential live on different grids");
  }
  const TorusGrid& torus = F.torus();
  const int n = torus.n();
  if (!(config.p > n)) throw InvalidArgument("measure_experiment: p must exceed n");
  if (2 * config.ball_half_width + 1 > torus.res()) {
    throw InvalidArgument("measure_experiment: ball does not fit in the torus");
  }

  ExperimentRecord rec(std::move(solved));
  const ScalarField& psi = rec.solve.potential;

  auto& L = rec.ledger;
  L.p = config.p;
  L.delta0 = delta0(config.p, n);
  L.x0_node = psi.argmin();
  L.x0 = torus.coordinates(L.x0_node);
  rec.sup_abs_psi = -psi[L.x0_node];
  rec.sup_F = F.max();
  rec.entropy_p = entropy_norm(F, config.p);
  L.C6 = l1_estimate(psi);

  const auto ball = geometry::ball_at_node(torus, L.x0_node, config.ball_half_width * torus.spacing());
  const ScalarField psi_ball = geometry::restrict_to_ball(psi, ball);
  const ScalarField F_ball = geometry::restrict_to_ball(F, ball);
  const Constants constants = choose_constants(HermitianField::constant(ball, Matrix::Identity(n, n)), n);
  L.C0 = constants.C0;
  L.c0 = constants.c0;

  const SublevelProblem problem(psi_ball, F_ball, L.c0);
  L.r0 = problem.r0();
  L.S = problem.S();
  const std::vector<double> s_grid = default_s_grid(L.S, config.s_count);
  rec.stats = sublevel_scan(problem, s_grid, config.comparison ? config.k_values : std::vector<int>{});
  rec.phi_a = phi_a_samples(problem, s_grid);

  // C4 over the s-grid, enlarged by the ratios at De Giorgi levels off the grid.
  L.C4 = a_phi_fit(rec.stats, config.p, n).C4;
  const auto Phi = [&](double s) { return problem.Phi(s); };
  for (int round = 0; round < 100; ++round) {
    rec.degiorgi = degiorgi_iterate(L.C4, L.delta0, Phi, L.S);
    if (!rec.degiorgi.violation) break;
    const double s = rec.degiorgi.violation->first;
    L.C4 = std::max(L.C4, problem.A(s) / std::pow(problem.Phi(s), 1.0 + L.delta0)) * (1.0 + 1e-9);
  }
  if (rec.degiorgi.violation) throw std::runtime_error("measure_experiment: De Giorgi hypothesis could not be met");
  L.c1 = rec.degiorgi.c1;
  L.c1_geometric = rec.degiorgi.c1_geometric;

  const YoungConstants young = measure_young_constants(config.p);
  L.C_p = young.C_p;
  L.C_p_prime = young.C_p_prime;
  rec.certificate = certify_bound(
      {rec.sup_abs_psi, L.S, L.c1, rec.entropy_p, L.C6, L.C_p, L.C_p_prime, config.p});
  rec.positivity_margin = std::numeric_limits<double>::infinity();
  if (!rec.certificate.vacuous) {
    const ScalarField top = problem.psi_s(L.S);
    for (std::size_t i = 0; i < top.size(); ++i) {
      if (top[i] < 0.0) {
        rec.positivity_margin = std::min(rec.positivity_margin, -psi_ball[i] - L.c0 * ball->distance2(i) - 1.0);
      }
    }
  }

  const std::vector<double> alphas = config.alpha_grid.empty() ? linear_grid(0.0, 40.0, 0.5) : config.alpha_grid;
  const std::vector<double> betas = config.beta_grid.empty() ? log_grid(1e-2, 1e4, 20) : config.beta_grid;
  const double volume = closed_ball_volume(*ball);
  rec.young_margin = std::numeric_limits<double>::infinity();
  L.alpha = std::numeric_limits<double>::infinity();
  L.beta = std::numeric_limits<double>::infinity();
  for (std::size_t idx : spread(s_grid.size(), config.comparison_s_count)) {
    const double s = s_grid[idx];
    const ScalarField psi_s = problem.psi_s(s);
    const double A = rec.stats[idx].A;
    const IntegralScan trud = trudinger_check(psi_s, A, n, betas, config.beta_cap_factor * volume);
    L.beta = std::min(L.beta, trud.empirical);
    ScalarField v = trudinger_field(psi_s, A, n);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= trud.empirical;
    rec.young_margin = std::min(rec.young_margin, young_check(v, F_ball, config.p, L.C_p));
    if (!config.comparison) continue;
    for (int k : config.k_values) {
      const double ak = problem.A_k(s, k);
      solver::DirichletOptions dopts;
      dopts.tol = config.dirichlet_tol;
      const auto sol = solver::solve_dirichlet_ma_ball(problem.comparison_density(s, k), dopts);
      const ComparisonResult cmp = comparison_check(psi_s, sol.potential, ak, n);
      const IntegralScan alpha = alpha_scan(sol.potential, alphas, config.alpha_cap_factor * volume);
      L.alpha = std::min(L.alpha, alpha.empirical);
      rec.comparison.push_back({k, s, A, ak, cmp.eps, cmp.margin, trud.empirical, alpha.empirical,
                                trudinger_chain_margin(psi_s, sol.potential, ak, n, betas), sol.residual});
    }
  }
  if (!config.comparison) L.alpha = 0.0;
  return rec;
}

void write_experiment(const std::filesystem::path& dir, const ExperimentRecord& rec) {
  std::filesystem::create_directories(dir);
  solver::write_report(dir / "solve", rec.solve);
  write_csv(dir / "phi_a.csv", phi_a_table(rec));
  write_csv(dir / "comparison.csv", comparison_table(rec));
  write_csv(dir / "summary.csv", summary_table(rec));

  const auto& L = rec.ledger;
  nlohmann::json j;
  j["c0"] = L.c0;
  j["r0"] = L.r0;
  j["C0"] = L.C0;
  j["S"] = L.S;
  j["p"] = L.p;
  j["delta0"] = L.delta0;
  j["C4"] = L.C4;
  j["c1"] = L.c1;
  j["c1_geometric"] = L.c1_geometric;
  j["alpha"] = L.alpha;
  j["beta"] = L.beta;
  j["C_p"] = L.C_p;
  j["C_p_prime"] = L.C_p_prime;
  j["C6"] = L.C6;
  j["x0_node"] = L.x0_node;
  j["x0"] = L.x0;
  j["degiorgi_levels"] = rec.degiorgi.levels.size();
  j["degiorgi_certifies_zero"] = rec.degiorgi.certifies_zero;
  std::ofstream out(dir / "ledger.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "ledger.json").string());
  out << j.dump(2) << '\n';
}

}  // namespace qmalab::harness
