#include "qmalab/cli.hpp"
#include "qmalab/field_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

namespace qmalab::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kComparisonFloor = -1e-4;
constexpr double kPhiAFloor = -1e-10;

struct Args {
  std::string command;
  std::string run_dir;
  std::optional<std::string> config, out;
  bool force = false;
  bool break_j = false;
  int workers = 1;
  int instances = 1000;
  std::uint64_t seed = 0;
};

RunConfig require_config(const Args& a) { return load_config(*a.config); }

fs::path output_dir(const Args& a, const RunConfig& cfg) {
  if (a.out) return *a.out;
  if (!cfg.output.empty()) return cfg.output;
  throw ConfigError(a.command + ": no output directory (--out or \"output\" in the config)");
}

// Creates `dir`, refusing to reuse a non-empty directory unless forced.
void prepare_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw ConfigError(dir.string() + " exists and is not empty (use --force to overwrite)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::shared_ptr<const TorusGrid> make_grid(const RunConfig& cfg) {
  return std::make_shared<const TorusGrid>(cfg.m, cfg.res, cfg.period);
}

void write_run_meta(const fs::path& dir, const std::string& command, std::uint64_t seed) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  write_text(dir / "run.json", j.dump(2) + "\n");
}

// Property violations in an experiment record, empty when there are none.
std::vector<std::string> violations(const harness::ExperimentRecord& rec) {
  std::vector<std::string> out;
  const auto& c = rec.certificate;
  if (!c.vacuous && !c.holds) out.push_back("certificate lhs " + num(c.lhs) + " > rhs " + num(c.rhs));
  if (!(std::log(rec.sup_abs_psi) <= c.log_implied_bound)) {
    out.push_back("sup|psi| " + num(rec.sup_abs_psi) + " exceeds the implied bound");
  }
  for (const auto& s : rec.phi_a) {
    if (s.margin() < kPhiAFloor) out.push_back("Phi-A margin " + num(s.margin()) + " at s = " + num(s.s));
  }
  for (const auto& r : rec.comparison) {
    if (r.comparison_margin < kComparisonFloor) {
      out.push_back("comparison margin " + num(r.comparison_margin) + " at k = " + std::to_string(r.k) +
                    ", s = " + num(r.s));
    }
  }
  return out;
}

void print_certificate(std::ostream& out, const harness::ExperimentRecord& rec) {
  const auto& c = rec.certificate;
  out << "sup|psi| = " << num(rec.sup_abs_psi) << "\n"
      << "lhs = " << num(c.lhs) << "\n"
      << "rhs = " << num(c.rhs) << "\n"
      << "implied_bound = " << num(c.implied_bound) << " (log " << num(c.log_implied_bound) << ")\n"
      << "C4 = " << num(rec.ledger.C4) << ", c1 = " << num(rec.ledger.c1) << ", entropy_p = " << num(rec.entropy_p)
      << "\n";
  if (c.vacuous) out << "certificate vacuous: sup|psi| <= 2\n";
}

int cmd_verify(const Args& a, std::ostream& out) {
  VerifyOptions opts;
  opts.seed = a.seed;
  opts.instances = a.instances;
  opts.break_j = a.break_j;
  const auto results = run_verify(opts);
  int failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " value=" << num(r.value) << " " << r.detail << "\n";
    failed += r.passed ? 0 : 1;
  }
  out << results.size() << " suites, " << failed << " failed\n";
  return failed == 0 ? kSuccess : kPropertyViolation;
}

int cmd_solve(const Args& a, std::ostream& out) {
  const RunConfig cfg = require_config(a);
  const fs::path dir = output_dir(a, cfg);
  prepare_dir(dir, a.force);
  write_text(dir / "config.json", cfg.source);
  write_run_meta(dir, "solve", a.seed);
  const auto grid = make_grid(cfg);
  const FamilyContext ctx{grid, cfg.kind, cfg.p, a.seed};
  const ScalarField F = make_rhs(cfg.F, ctx);
  geometry::write_field(dir / "F.field", F);
  const auto report = harness::solve_flat(cfg.experiment, F);
  solver::write_report(dir / "solve", report);
  out << "equation " << solver::to_string(cfg.kind) << ", n = " << grid->n() << ", res = " << grid->res() << "\n"
      << "b = " << num(report.b) << "\n"
      << "newton iterations = " << report.iterations << "\n"
      << "final residual = " << num(report.residual_history.empty() ? 0.0 : report.residual_history.back()) << "\n"
      << "cone margin = " << num(report.cone_margin) << "\n"
      << "sup|psi| = " << num(-report.potential.min()) << "\n";
  if (cfg.F.family == "manufactured") {
    const ScalarField exact = manufactured_potential(cfg.F, ctx);
    const double shift = exact.max();
    double err = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
      err = std::max(err, std::abs(report.potential[i] - (exact[i] - shift)));
    }
    out << "recovery error = " << num(err) << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return kSuccess;
}

int cmd_run(const Args& a, std::ostream& out) {
  const RunConfig cfg = require_config(a);
  const fs::path dir = output_dir(a, cfg);
  prepare_dir(dir, a.force);
  write_text(dir / "config.json", cfg.source);
  write_run_meta(dir, "run", a.seed);
  const ScalarField F = make_rhs(cfg.F, {make_grid(cfg), cfg.kind, cfg.p, a.seed});
  geometry::write_field(dir / "F.field", F);
  const auto rec = harness::run_experiment(cfg.experiment, F);
  harness::write_experiment(dir, rec);
  print_certificate(out, rec);
  const auto bad = violations(rec);
  for (const auto& v : bad) out << "violation: " << v << "\n";
  return bad.empty() ? kSuccess : kPropertyViolation;
}

int cmd_certify(const Args& a, std::ostream& out) {
  const fs::path dir = a.run_dir;
  if (!fs::exists(dir / "solve") || !fs::exists(dir / "F.field")) {
    throw ConfigError("certify: " + dir.string() + " is not a completed run");
  }
  const RunConfig cfg = load_config(dir / "config.json");
  const ScalarField F = geometry::read_scalar_field(dir / "F.field");
  solver::SolveReport report = solver::read_report(dir / "solve");
  const auto& torus = F.torus();
  if (torus.m() != cfg.m || torus.res() != cfg.res) throw ConfigError("certify: F does not match the config");
  // Rebuild both fields on one grid handle.
  const auto grid = make_grid(cfg);
  ScalarField F_on(grid, std::vector<double>(F.values().begin(), F.values().end()));
  solver::SolveReport solved(ScalarField(grid, std::vector<double>(report.potential.values().begin(),
                                                                  report.potential.values().end())));
  solved.b = report.b;
  solved.cone_margin = report.cone_margin;
  solved.iterations = report.iterations;
  solved.residual_history = report.residual_history;
  solved.continuation = report.continuation;
  const auto rec = harness::measure_experiment(cfg.experiment, F_on, std::move(solved));
  harness::write_csv(dir / "phi_a.csv", harness::phi_a_table(rec));
  harness::write_csv(dir / "comparison.csv", harness::comparison_table(rec));
  harness::write_csv(dir / "summary.csv", harness::summary_table(rec));
  print_certificate(out, rec);
  const auto bad = violations(rec);
  for (const auto& v : bad) out << "violation: " << v << "\n";
  return bad.empty() ? kSuccess : kPropertyViolation;
}

harness::Table sweep_table() {
  harness::Table t;
  t.columns = {"member", "seed"};
  const auto summary = harness::summary_table(harness::ExperimentRecord(
      solver::SolveReport(ScalarField::zeros(std::make_shared<const TorusGrid>(1, 4, 1.0)))));
  t.columns.insert(t.columns.end(), summary.columns.begin(), summary.columns.end());
  return t;
}

harness::Table sweep_summary(const harness::Table& rows, std::size_t members) {
  harness::Table t{{"instances", "completed", "max_sup_abs_psi", "min_sup_abs_psi", "sup_abs_psi_variation",
                    "max_entropy_p", "max_implied_bound", "max_log_implied_bound", "min_sup_F", "max_sup_F",
                    "bound_holds"},
                   {}};
  auto col = [&](const char* name) {
    const auto it = std::find(rows.columns.begin(), rows.columns.end(), name);
    std::vector<double> v;
    for (const auto& r : rows.rows) v.push_back(r[static_cast<std::size_t>(it - rows.columns.begin())]);
    return v;
  };
  if (rows.rows.empty()) {
    t.rows.push_back({double(members), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0});
    return t;
  }
  const auto psi = col("sup_abs_psi"), ent = col("entropy_p"), bound = col("implied_bound"),
             lbound = col("log_implied_bound"), supF = col("sup_F");
  const double hi = *std::max_element(psi.begin(), psi.end()), lo = *std::min_element(psi.begin(), psi.end());
  bool holds = true;
  for (std::size_t i = 0; i < psi.size(); ++i) holds = holds && std::log(psi[i]) <= lbound[i];
  t.rows.push_back({double(members), double(rows.rows.size()), hi, lo, (hi - lo) / hi,
                    *std::max_element(ent.begin(), ent.end()), *std::max_element(bound.begin(), bound.end()),
                    *std::max_element(lbound.begin(), lbound.end()), *std::min_element(supF.begin(), supF.end()),
                    *std::max_element(supF.begin(), supF.end()), holds ? 1.0 : 0.0});
  return t;
}

int cmd_sweep(const Args& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = require_config(a);
  if (cfg.members.size() < 3) throw ConfigError("sweep: the config needs at least three sweep members");
  const fs::path dir = output_dir(a, cfg);
  prepare_dir(dir, a.force);
  write_text(dir / "config.json", cfg.source);
  write_run_meta(dir, "sweep", a.seed);
  const auto grid = make_grid(cfg);

  std::mutex mutex;
  std::map<std::size_t, std::vector<double>> rows;
  std::map<std::size_t, std::vector<std::string>> bad;
  std::optional<std::string> failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto flush = [&] {
    harness::Table t = sweep_table();
    for (const auto& [i, row] : rows) t.rows.push_back(row);
    harness::write_csv(dir / "sweep.csv", t);
    harness::write_csv(dir / "sweep_summary.csv", sweep_summary(t, cfg.members.size()));
  };
  flush();

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= cfg.members.size() || stop) return;
      const std::uint64_t seed = a.seed + i;
      try {
        const ScalarField F = make_rhs(cfg.members[i], {grid, cfg.kind, cfg.p, seed});
        const fs::path member_dir = dir / ("member_" + std::to_string(i));
        fs::create_directories(member_dir);
        geometry::write_field(member_dir / "F.field", F);
        const auto rec = harness::run_experiment(cfg.experiment, F);
        harness::write_experiment(member_dir, rec);
        std::vector<double> row{double(i), double(seed)};
        const auto summary = harness::summary_table(rec);
        row.insert(row.end(), summary.rows.front().begin(), summary.rows.front().end());
        std::lock_guard lock(mutex);
        rows[i] = std::move(row);
        if (auto v = violations(rec); !v.empty()) bad[i] = std::move(v);
        flush();
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        if (!failure) failure = "member " + std::to_string(i) + ": " + e.what();
        stop = true;
        return;
      }
    }
  };
  const int workers = std::min<int>(a.workers, static_cast<int>(cfg.members.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  const harness::Table header = sweep_table();
  auto at = [&](const std::vector<double>& row, const char* name) {
    return row[static_cast<std::size_t>(std::find(header.columns.begin(), header.columns.end(), name) -
                                        header.columns.begin())];
  };
  for (const auto& [i, row] : rows) {
    out << "member " << i << ": sup_F = " << num(at(row, "sup_F")) << ", entropy_p = " << num(at(row, "entropy_p"))
        << ", sup|psi| = " << num(at(row, "sup_abs_psi"))
        << ", log implied bound = " << num(at(row, "log_implied_bound")) << "\n";
  }
  if (failure) {
    err << "sweep aborted, " << rows.size() << " of " << cfg.members.size() << " members kept: " << *failure << "\n";
    return kSolverFailure;
  }
  for (const auto& [i, list] : bad) {
    for (const auto& v : list) out << "violation in member " << i << ": " << v << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return bad.empty() ? kSuccess : kPropertyViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Args a;
  CLI::App app{"Hyperhermitian Monge-Ampere solver and estimate-verification harness", "qmalab"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "run the pointwise property suites");
  verify->add_option("--seed", a.seed, "base seed for random instances");
  verify->add_option("--instances", a.instances, "random instances per suite")->check(CLI::Range(1, 100000000));
  verify->add_flag("--break-j", a.break_j)->group("");  // test hook: non-antisymmetric J

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", a.config, "run configuration (JSON)")->required();
    sub->add_option("--out", a.out, "output directory (defaults to \"output\" in the config)");
    sub->add_flag("--force", a.force, "replace an existing output directory");
    sub->add_option("--seed", a.seed, "seed for random F families");
  };
  auto* solve = app.add_subcommand("solve", "solve the torus equation for the configured F");
  add_run_options(solve);
  auto* run = app.add_subcommand("run", "solve and run every harness measurement");
  add_run_options(run);
  auto* sweep = app.add_subcommand("sweep", "run the harness over the configured F family");
  add_run_options(sweep);
  sweep->add_option("--workers", a.workers, "concurrent sweep members")->check(CLI::Range(1, 256));
  auto* certify = app.add_subcommand("certify", "measure and certify a completed solve directory");
  certify->add_option("run_dir", a.run_dir, "directory written by solve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidation;
  }
  a.command = app.get_subcommands().front()->get_name();

  try {
    if (a.command == "verify") return cmd_verify(a, out);
    if (a.command == "solve") return cmd_solve(a, out);
    if (a.command == "run") return cmd_run(a, out);
    if (a.command == "sweep") return cmd_sweep(a, out, err);
    return cmd_certify(a, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const solver::SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kSolverFailure;
  }
}

}  // namespace qmalab::cli
