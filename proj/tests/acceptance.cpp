// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "qmalab/cli.hpp"
#include "qmalab/pointalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace qmalab;
namespace fs = std::filesystem;
using geometry::HermitianField;
using geometry::ScalarField;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int failures = 0;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(const std::string& name, bool ok, const std::string& detail, double seconds, double budget) {
  const bool in_time = seconds <= budget;
  const bool pass = ok && in_time;
  failures += pass ? 0 : 1;
  std::printf("%s %s: %s [%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(), seconds,
              budget, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "qmalab_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(std::vector<std::string> args, std::string& out) {
  args.insert(args.begin(), "qmalab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), o, std::cerr);
  out = o.str();
  return code;
}

std::vector<double> column(const harness::Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("missing column " + name);
  const auto c = static_cast<std::size_t>(it - t.columns.begin());
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(r[c]);
  return v;
}

// --- pointwise identities -----------------------------------------------------------

void det_identity_criterion() {
  Timer t;
  cli::VerifyOptions opts;
  opts.instances = 1000;
  const auto pos = cli::suite_det_identity(opts);
  const auto neg = cli::suite_det_identity_negative(opts);
  report("det_identity", pos.passed && neg.passed,
         fmt("max |det(Theta~) det(g~) - 1| = %.3e (< 1e-8) over 1000 instances at m = 1, 2; "
             "without q-real pairing %.3e (> 1e-2)",
             pos.value, neg.value),
         t.seconds(), 60);
}

void det_inequality_criterion() {
  Timer t;
  cli::VerifyOptions opts;
  opts.instances = 1000;
  const auto r = cli::suite_det_inequality(opts);
  report("det_inequality", r.passed, r.detail, t.seconds(), 60);
}

// --- solver-backed criteria ---------------------------------------------------------

struct SolvedCase {
  std::string label;
  double recovery_error;
  double identity_error;
  double seconds;
};

SolvedCase manufactured_case(int m, int res, solver::EquationKind kind) {
  Timer t;
  const auto model = geometry::make_flat_model(m, res, 1.0);
  const ScalarField phi = ScalarField::from_function(model.grid, [](const Point& x) {
    return 0.05 * std::cos(kTwoPi * x[1]) + 0.03 * std::sin(kTwoPi * (x[0] + x[2]));
  });
  const ScalarField F = solver::manufacture_rhs(kind, phi, model.g, &model.g, model.J);
  const auto r = kind == solver::EquationKind::cma ? solver::solve_cma_torus(F, model.g, model.J)
                                                   : solver::solve_n1ma_torus(F, model.g, model.g, model.J);
  const double top = phi.max();
  double err = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) err = std::max(err, std::abs(r.potential[i] - (phi[i] - top)));

  // Operator identity on the solver output.
  const int n = model.grid->n();
  const ScalarField& u = r.potential;
  HermitianField metric = kind == solver::EquationKind::cma ? pointalg::g_tilde(model.g, u, model.J)
                                                            : pointalg::g_hat(model.g, model.g, u, model.J);
  const HermitianField theta = kind == solver::EquationKind::cma
                                   ? pointalg::theta_tilde(metric, model.J)
                                   : pointalg::theta_hat(metric, model.g, model.J);
  const ScalarField L = pointalg::operator_L(u, theta);
  const ScalarField tr = pointalg::trace_field(metric, model.g);
  double id_err = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) id_err = std::max(id_err, std::abs(L[i] - (n - tr[i])));
  return {fmt("%s n=%d res %d", solver::to_string(kind), n, res), err, id_err, t.seconds()};
}

void solver_criteria() {
  std::vector<SolvedCase> cases;
  for (auto [m, res] : {std::pair{1, 16}, std::pair{2, 6}}) {
    for (auto kind : {solver::EquationKind::cma, solver::EquationKind::n1ma}) {
      cases.push_back(manufactured_case(m, res, kind));
    }
  }
  double total = 0.0, worst_rec = 0.0, worst_id = 0.0;
  std::string rec_detail, id_detail;
  for (const auto& c : cases) {
    total += c.seconds;
    worst_rec = std::max(worst_rec, c.recovery_error);
    worst_id = std::max(worst_id, c.identity_error);
    rec_detail += fmt("%s %.2e; ", c.label.c_str(), c.recovery_error);
    id_detail += fmt("%s %.2e; ", c.label.c_str(), c.identity_error);
  }
  report("operator_identities", worst_id <= 1e-8,
         fmt("max |L u - (n - tr)| = %.3e (<= 1e-8): %s", worst_id, id_detail.c_str()), total, 300);
  report("manufactured_recovery", worst_rec <= 1e-7,
         fmt("max sup-error = %.3e (<= 10 tol = 1e-7): %s", worst_rec, rec_detail.c_str()), total, 600);
}

// --- harness criteria through the sweep command -----------------------------------

void trig_family(const fs::path& work) {
  Timer t;
  std::string out;
  const fs::path dir = work / "trig_family";
  const int code = run_cli({"sweep", "--config", QMALAB_CONFIG_DIR "/trig_family.json", "--out", dir.string()}, out);
  const double seconds = t.seconds();
  if (code != cli::kSuccess && code != cli::kPropertyViolation) {
    report("comparison_inequality", false, fmt("sweep exited with %d", code), seconds, 1800);
    report("phi_a_inequality", false, "no data", seconds, 1800);
    report("a_phi_bound", false, "no data", seconds, 1800);
    return;
  }
  const harness::Table sweep = harness::read_csv(dir / "sweep.csv");
  double cmp_min = INFINITY;
  std::size_t cmp_rows = 0;
  std::vector<int> ks;
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const fs::path member = dir / ("member_" + std::to_string(i));
    const harness::Table cmp = harness::read_csv(member / "comparison.csv");
    for (double v : column(cmp, "comparison_margin")) cmp_min = std::min(cmp_min, v);
    for (double k : column(cmp, "k")) {
      if (std::find(ks.begin(), ks.end(), int(k)) == ks.end()) ks.push_back(int(k));
    }
    cmp_rows += cmp.rows.size();
  }
  const bool full = sweep.rows.size() == 5 && cmp_rows == 5 * 3 * 8 && ks.size() == 3;
  report("comparison_inequality", full && cmp_min >= -1e-4,
         fmt("min nodewise margin %.3e (>= -1e-4) over %zu runs (5 experiments, k = 4, 16, 64, 8 s values), "
             "ball 13^4",
             cmp_min, cmp_rows),
         seconds, 1800);
  const auto C4 = column(sweep, "C4");
  const auto ent = column(sweep, "entropy_p");
  const double hi = *std::max_element(C4.begin(), C4.end()), lo = *std::min_element(C4.begin(), C4.end());
  const double ent_spread = *std::max_element(ent.begin(), ent.end()) - *std::min_element(ent.begin(), ent.end());
  report("a_phi_bound", sweep.rows.size() == 5 && std::isfinite(hi) && lo > 0.0 && hi / lo <= 3.0,
         fmt("C4 in [%.4g, %.4g], ratio %.3f (<= 3) over 5 trig members at entropy_p = 3 (spread %.1e), delta0 = 0.25",
             lo, hi, hi / lo, ent_spread),
         seconds, 1800);
}

void degiorgi_equality_profile() {
  Timer t;
  double worst = 0.0;
  std::string detail;
  for (double K : {0.5, 2.0, 10.0}) {
    for (double S : {0.05, 0.3}) {
      const double d0 = 0.25;
      const double C4 = harness::equality_profile_C4(K, d0, S);
      const auto r = harness::degiorgi_iterate(C4, d0, [&](double s) { return s > 0.0 ? K * std::pow(s / S, 4.0) : 0.0; }, S);
      const double rel = r.converged ? std::abs(r.c1 / K - 1.0) : INFINITY;
      worst = std::max(worst, rel);
    }
  }
  report("degiorgi_simulator", worst <= 0.05,
         fmt("equality profile Phi = K (s/S)^4: max |c1/K - 1| = %.3e (<= 0.05) over K in {0.5, 2, 10}, S in {0.05, 0.3}",
             worst),
         t.seconds(), 60);
}

void spike_sweep(const fs::path& work, double& phi_a_min, std::size_t& phi_rows) {
  Timer t;
  std::string out;
  const fs::path dir = work / "spike_sweep";
  const int code = run_cli({"sweep", "--config", QMALAB_CONFIG_DIR "/spike_sweep.json", "--out", dir.string()}, out);
  const double seconds = t.seconds();
  if (code != cli::kSuccess && code != cli::kPropertyViolation) {
    report("spike_sweep_bound", false, fmt("sweep exited with %d", code), seconds, 1800);
    return;
  }
  const harness::Table sweep = harness::read_csv(dir / "sweep.csv");
  const auto psi = column(sweep, "sup_abs_psi");
  const auto supF = column(sweep, "sup_F");
  const auto ent = column(sweep, "entropy_p");
  const auto lbound = column(sweep, "log_implied_bound");
  bool bounded = sweep.rows.size() == 3;
  std::string rows;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    bounded = bounded && std::log(psi[i]) <= lbound[i];
    rows += fmt("sup F %.3g, entropy %.4g, sup|psi| %.4f, log bound %.4g; ", supF[i], ent[i], psi[i], lbound[i]);
  }
  const double hi = *std::max_element(psi.begin(), psi.end()), lo = *std::min_element(psi.begin(), psi.end());
  const double variation = (hi - lo) / hi;
  const double growth = supF.back() / supF.front();
  report("spike_sweep_bound", bounded && variation < 0.25 && growth >= 3.0,
         fmt("sup|psi| variation %.3f (< 0.25), sup F growth %.2fx; %s", variation, growth, rows.c_str()), seconds,
         1800);
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const harness::Table pa = harness::read_csv(dir / ("member_" + std::to_string(i)) / "phi_a.csv");
    for (double v : column(pa, "phi_a_margin")) phi_a_min = std::min(phi_a_min, v);
    phi_rows += pa.rows.size();
  }
}

void young() {
  Timer t;
  const auto r = cli::suite_young({});
  report("young_constants", r.passed, r.detail, t.seconds(), 120);
}

}  // namespace

int main() {
  const fs::path work = work_dir();
  det_identity_criterion();
  det_inequality_criterion();
  solver_criteria();
  degiorgi_equality_profile();
  young();

  // Phi-A samples are collected from every experiment run below.
  Timer phi_timer;
  double phi_a_min = INFINITY;
  std::size_t phi_rows = 0;
  trig_family(work);
  for (std::size_t i = 0; i < 5; ++i) {
    const fs::path pa = work / "trig_family" / ("member_" + std::to_string(i)) / "phi_a.csv";
    if (!fs::exists(pa)) continue;
    const harness::Table t = harness::read_csv(pa);
    for (double v : column(t, "phi_a_margin")) phi_a_min = std::min(phi_a_min, v);
    phi_rows += t.rows.size();
  }
  spike_sweep(work, phi_a_min, phi_rows);
  report("phi_a_inequality", phi_rows == 8 * 64 && phi_a_min >= -1e-10,
         fmt("min of A(s) - t Phi(s - t) = %.3e (>= -1e-10) over %zu samples from 8 experiments", phi_a_min, phi_rows),
         phi_timer.seconds(), 3600);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
