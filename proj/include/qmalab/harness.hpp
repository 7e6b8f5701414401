#pragma once

// Estimate-verification pipeline: entropy norms, sublevel statistics around
// the minimum point, the comparison inequality against auxiliary Dirichlet
// solutions, exponential integrability scans, the A-Phi exponent bound, the
// De Giorgi level-set iteration and the final L-infinity certificate.

#include "qmalab/geometry.hpp"
#include "qmalab/solver.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qmalab::harness {

using geometry::BallGrid;
using geometry::HermitianField;
using geometry::ScalarField;

// Integral of e^F (1 + |F|)^p.
double entropy_norm(const ScalarField& F, double p);

// Integral of -psi.
double l1_estimate(const ScalarField& psi);

struct Constants {
  double C0;  // max over nodes of max(lambda_max(h), 1 / lambda_min(h))
  double c0;  // 0.9 times the largest admissible value
};

// c0 is the largest value with h - (c0 C0 / (n - 1)) tr(h) Id >= 0 at every node, times 0.9.
Constants choose_constants(const HermitianField& h, int n);

struct SublevelStats {
  double s = 0.0;
  std::vector<std::size_t> nodes;  // B_s = {psi_s < 0}
  double A = 0.0;
  double Phi = 0.0;
  std::vector<std::pair<int, double>> A_k;  // (k, A_k(s))
};

// psi_s = psi - psi(x0) + c0 |z - x0|^2 - s on a ball centred at x0.
//
// r0 is half the smallest radius of a boundary node, so psi_s >= 4 c0 r0^2 - s > 0
// on every boundary node for s < S = 4 c0 r0^2.
class SublevelProblem {
 public:
  SublevelProblem(ScalarField psi, ScalarField F, double c0);

  const BallGrid& ball() const { return psi_.ball(); }
  const ScalarField& psi() const { return psi_; }
  const ScalarField& F() const { return F_; }
  double c0() const { return c0_; }
  double r0() const { return r0_; }
  double S() const { return 4.0 * c0_ * r0_ * r0_; }

  ScalarField psi_s(double s) const;
  double Phi(double s) const;
  double A(double s) const;
  // Integral of tau_k(-psi_s) e^F over interior nodes.
  double A_k(double s, int k) const;
  // Minimum of psi_s over boundary nodes.
  double boundary_min(double s) const;
  SublevelStats stats(double s, const std::vector<int>& k_values = {}) const;

  // tau_k(-psi_s) e^F / A_k(s) on interior nodes, zero elsewhere.
  ScalarField comparison_density(double s, int k) const;

 private:
  ScalarField psi_;
  ScalarField F_;
  double c0_;
  double r0_;
  double psi_x0_;
  std::vector<double> weight_;  // e^F times the cell volume on closed-ball nodes
  std::vector<double> base_;    // psi - psi(x0) + c0 |z - x0|^2
};

// 32 log-spaced values in (0.01, 0.99) S by default.
std::vector<double> default_s_grid(double S, int count = 32);

// Throws InvalidArgument for s outside (0, S) or if psi_s fails to be positive on the boundary.
std::vector<SublevelStats> sublevel_scan(const SublevelProblem& problem, const std::vector<double>& s_grid,
                                         const std::vector<int>& k_values = {});

struct PhiASample {
  double s, t, A_s, Phi_s, Phi_s_minus_t;
  double margin() const { return A_s - t * Phi_s_minus_t; }
};

// t Phi(s - t) <= A(s) at t = s/2 and s/4 for every s.
std::vector<PhiASample> phi_a_samples(const SublevelProblem& problem, const std::vector<double>& s_grid);

// eps = A_k^{1/(n+1)} ((n+1)/n)^{n/(n+1)}.
double comparison_epsilon(double A_k, int n);

struct ComparisonResult {
  double eps = 0.0;
  double margin = 0.0;  // min over the closed ball of eps (-psi_sk)^{n/(n+1)} - (-psi_s)
  std::size_t worst_node = 0;
};

ComparisonResult comparison_check(const ScalarField& psi_s, const ScalarField& psi_sk, double A_k, int n);

struct IntegralScan {
  std::vector<std::pair<double, double>> table;  // (exponent, integral)
  double empirical = 0.0;  // largest exponent with integral <= cap
};

// Integral over the closed ball of exp(-alpha psi_sk).
IntegralScan alpha_scan(const ScalarField& psi_sk, const std::vector<double>& alpha_grid, double cap);

// U_s = (-psi_s)^{(n+1)/n} / A^{1/n} on B_s, zero elsewhere.
ScalarField trudinger_field(const ScalarField& psi_s, double A, int n);
// Integral over B_s of exp(beta U_s).
IntegralScan trudinger_check(const ScalarField& psi_s, double A, int n, const std::vector<double>& beta_grid,
                             double cap);

struct YoungConstants {
  double p;
  double C_p;        // sup over v >= 0 and F of ((v/2)^p - (1+|F|)^p) e^{F - v}
  double C_p_prime;  // sup over x >= 0 of p x^{1/p} - x
};

YoungConstants measure_young_constants(double p);

// min over nodes of e^F (1+|F|)^p + C_p e^v - (v/2)^p e^F. Throws on negative v.
double young_check(const ScalarField& v, const ScalarField& F, double p, double C_p);
// Same inequality for scalar arguments.
double young_margin(double v, double F, double p, double C_p);
// min over the grid of x + C'_p - p x^{1/p}.
double power_bound_margin(double p, double C_p_prime, const std::vector<double>& xs);

struct APhiFit {
  double C4 = 0.0;
  double delta0 = 0.0;
};

double delta0(double p, int n);
// C4 = max over stats with Phi > 0 of A / Phi^{1 + delta0}.
APhiFit a_phi_fit(const std::vector<SublevelStats>& stats, double p, int n);

struct DeGiorgiOptions {
  int max_steps = 400;
  double min_level = 1e-14;  // relative to S
};

struct DeGiorgiResult {
  double c1 = 0.0;            // [S / (2 C4 rho)]^{1/delta0}, rho = sum_j (Phi(s_j)/Phi(S))^{delta0}
  double c1_geometric = 0.0;  // [S (1 - 2^{-delta0}) / (2 C4)]^{1/delta0}
  double Phi_top = 0.0;
  std::vector<double> levels;  // s_0 = S, s_1, ...
  // The iteration reached Phi = 0 at a positive level.
  bool certifies_zero = false;
  // Iteration ran to completion without violating the hypothesis.
  bool converged = false;
  std::optional<std::pair<double, double>> violation;  // (s, t)
};

// Level-set iteration s_{j+1} = s_j - t_j, t_j = 2 C4 Phi(s_j)^{delta0}, starting at S.
DeGiorgiResult degiorgi_iterate(double C4, double delta0, const std::function<double(double)>& Phi, double S,
                                const DeGiorgiOptions& options = {});

// Phi = K (s/S)^{1/delta0} meets t Phi(s - t) <= C4 Phi(s)^{1 + delta0} with equality for this C4.
double equality_profile_C4(double K, double delta0, double S);

struct CertificateInput {
  double sup_abs_psi;  // -psi(x0)
  double S;            // 4 c0 r0^2
  double c1;
  double entropy;
  double C6;  // integral of -psi
  double C_p;
  double C_p_prime;
  double p;
};

struct Certificate {
  bool vacuous = false;  // psi(x0) >= -2
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;  // lhs <= rhs at the actual -psi(x0)
  double implied_bound = 2.0;
  double log_implied_bound = 0.6931471805599453;
};

// (p^p / 2^{p+1}) c1 log(X - S) <= entropy + C6 C_p e^{C'_p} / (X - S)^{1/2}; the implied
// bound is the largest X satisfying it (at least 2).
Certificate certify_bound(const CertificateInput& input);

// --- experiments ------------------------------------------------------------

struct ConstantLedger {
  double c0 = 0.0, r0 = 0.0, C0 = 0.0, S = 0.0;
  double p = 0.0, delta0 = 0.0;
  double C4 = 0.0, c1 = 0.0, c1_geometric = 0.0;
  double alpha = 0.0, beta = 0.0;
  double C_p = 0.0, C_p_prime = 0.0, C6 = 0.0;
  std::size_t x0_node = 0;
  Point x0;
};

// Measurement settings; the torus comes from the grid of F, with g = h = Id.
struct ExperimentConfig {
  solver::EquationKind kind = solver::EquationKind::n1ma;
  double p = 4.0;
  double tol = 1e-8;
  double dirichlet_tol = 1e-6;
  int ball_half_width = 6;  // ball radius in grid spacings
  int s_count = 32;
  bool comparison = true;
  int comparison_s_count = 8;
  std::vector<int> k_values{4, 16, 64};
  std::vector<double> alpha_grid;  // empty: 0, 0.5, ..., 40
  std::vector<double> beta_grid;   // empty: 0 and 20 log-spaced points per decade on [1e-2, 1e4]
  double alpha_cap_factor = 2.0;   // cap = factor * Vol(ball)
  double beta_cap_factor = 2.0;
  int gmres_restart = 30;
};

struct ComparisonRow {
  int k;
  double s, A_s, A_k_s, eps, comparison_margin, trudinger_beta, alpha_emp, trudinger_chain_margin;
  double dirichlet_residual;
};

struct ExperimentRecord {
  explicit ExperimentRecord(solver::SolveReport s) : solve(std::move(s)) {}

  solver::SolveReport solve;
  ConstantLedger ledger;
  std::vector<SublevelStats> stats;
  std::vector<PhiASample> phi_a;
  std::vector<ComparisonRow> comparison;
  DeGiorgiResult degiorgi;
  Certificate certificate;
  double entropy_p = 0.0;
  double sup_F = 0.0;
  double sup_abs_psi = 0.0;
  double young_margin = 0.0;
  double positivity_margin = 0.0;  // min of -psi - c0 |z - x0|^2 - 1 on B_S (only when psi(x0) < -2)
};

// Torus solve with g = h = Id and the standard J.
solver::SolveReport solve_flat(const ExperimentConfig& config, const ScalarField& F);
// Every measurement on a ball around the minimum of an already computed potential.
ExperimentRecord measure_experiment(const ExperimentConfig& config, const ScalarField& F,
                                    solver::SolveReport solved);
// solve_flat followed by measure_experiment.
ExperimentRecord run_experiment(const ExperimentConfig& config, const ScalarField& F);

// Writes phi_a.csv, comparison.csv, summary.csv, ledger.json and the potential.
void write_experiment(const std::filesystem::path& dir, const ExperimentRecord& record);

// CSV helpers shared with sweeps.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

Table phi_a_table(const ExperimentRecord& record);
Table comparison_table(const ExperimentRecord& record);
Table summary_table(const ExperimentRecord& record);

}  // namespace qmalab::harness
