#pragma once

// Command-line front end: run configuration, right-hand-side families, the
// verify property suites and the solve / sweep / certify commands.

#include "qmalab/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmalab::cli {

using geometry::ScalarField;
using geometry::TorusGrid;

enum ExitCode : int { kSuccess = 0, kValidation = 1, kSolverFailure = 2, kPropertyViolation = 3 };

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// --- right-hand-side families ----------------------------------------------

struct FamilySpec {
  std::string family = "zero";  // zero | constant | trig | spike | manufactured
  double value = 0.0;           // constant
  // trig: sum of `terms` random cosines with integer modes up to `max_mode`,
  // rescaled to sup |F| = amplitude, or to entropy_p(F) = entropy when set.
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int terms = 4;
  int max_mode = 2;
  double entropy = 0.0;
  // spike: background * sin(2 pi x_1) sin(2 pi x_2) + height * exp(-d^2 / (2 w^2)),
  // d the periodic distance to the torus centre; w fixed by `width` or tuned so
  // that entropy_p(F) = entropy_p(background) + entropy_excess.
  double height = 0.0;
  double background = 0.0;
  double width = 0.0;
  double entropy_excess = 0.0;
  // manufactured: potential amplitude * cos(2 pi <mode, x>).
  std::vector<int> mode;
};

struct FamilyContext {
  std::shared_ptr<const TorusGrid> grid;
  solver::EquationKind kind = solver::EquationKind::n1ma;
  double p = 4.0;
  std::uint64_t seed = 0;  // used when the spec has no seed of its own
};

ScalarField make_rhs(const FamilySpec& spec, const FamilyContext& ctx);
// Known potential of a manufactured spec (sup = 0 normalisation not applied).
ScalarField manufactured_potential(const FamilySpec& spec, const FamilyContext& ctx);

// Seeded band-limited trigonometric field with sup |F| = 1.
ScalarField trig_field(const std::shared_ptr<const TorusGrid>& grid, std::uint64_t seed, int terms, int max_mode);
ScalarField spike_field(const std::shared_ptr<const TorusGrid>& grid, double height, double background, double width);
// Width with entropy_p(spike) = entropy_p(background only) + excess (bisection in log w).
double tune_spike_width(const std::shared_ptr<const TorusGrid>& grid, double height, double background,
                        double excess, double p);

// --- configuration -----------------------------------------------------------

struct RunConfig {
  int m = 1;
  int res = 16;
  double period = 1.0;
  solver::EquationKind kind = solver::EquationKind::n1ma;
  double p = 4.0;
  FamilySpec F;
  std::vector<FamilySpec> members;  // sweep members
  harness::ExperimentConfig experiment;
  std::string output;
  std::string source;  // the configuration text as given
};

// Validates against the schema; unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// --- verify --------------------------------------------------------------------

struct SuiteResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // the statistic compared against the threshold
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int instances = 1000;
  bool break_j = false;  // replaces J with a non-antisymmetric matrix
};

SuiteResult suite_complex_structure(const VerifyOptions& options);
SuiteResult suite_det_identity(const VerifyOptions& options);
SuiteResult suite_det_identity_negative(const VerifyOptions& options);
SuiteResult suite_det_inequality(const VerifyOptions& options);
SuiteResult suite_operator_identities(const VerifyOptions& options);
SuiteResult suite_cone(const VerifyOptions& options);
SuiteResult suite_positivity(const VerifyOptions& options);
SuiteResult suite_young(const VerifyOptions& options);

std::vector<SuiteResult> run_verify(const VerifyOptions& options);

// Random q-real metric g~ = Id + H(phi) at one point, phi a trigonometric
// polynomial; the amplitude is reduced until the minimum eigenvalue is >= margin.
Matrix random_g_tilde(std::mt19937_64& rng, int m, double margin, const Matrix& j);
// Random g^ = Id + (tr H - H)/(n-1) at one point with the same construction.
Matrix random_g_hat(std::mt19937_64& rng, int m, double margin, const Matrix& j);

// --- commands ------------------------------------------------------------------

// Entry point shared by the binary and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmalab::cli
