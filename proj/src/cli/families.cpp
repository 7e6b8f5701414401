#include "qmalab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qmalab::cli {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sup_abs(const ScalarField& f) { return std::max(std::abs(f.max()), std::abs(f.min())); }

// Bisection for an increasing function on [lo, hi]; throws when the target is not bracketed.
template <class Fn>
double bisect_increasing(Fn&& fn, double lo, double hi, double target, const char* what) {
  if (!(fn(lo) <= target && fn(hi) >= target)) {
    throw ConfigError(std::string(what) + ": target is outside the attainable range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (fn(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ScalarField scaled(const ScalarField& f, double a) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x *= a;
  return ScalarField(f.grid(), std::move(v));
}

}  // namespace

ScalarField trig_field(const std::shared_ptr<const TorusGrid>& grid, std::uint64_t seed, int terms, int max_mode) {
  if (terms < 1 || max_mode < 1) throw ConfigError("trig: terms and max_mode must be positive");
  if (max_mode >= grid->res() / 2) throw ConfigError("trig: max_mode too large for the grid resolution");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dim = grid->real_dim();
  std::vector<std::vector<int>> q(terms, std::vector<int>(dim));
  std::vector<double> phase(terms), coeff(terms);
  for (int j = 0; j < terms; ++j) {
    bool zero = true;
    while (zero) {
      for (int& c : q[j]) c = mode(rng);
      zero = std::all_of(q[j].begin(), q[j].end(), [](int c) { return c == 0; });
    }
    phase[j] = kTwoPi * unit(rng);
    coeff[j] = 0.5 + 0.5 * unit(rng);
  }
  const double period = grid->period();
  ScalarField f = ScalarField::from_function(grid, [&](const Point& x) {
    double v = 0.0;
    for (int j = 0; j < terms; ++j) {
      double arg = phase[j];
      for (int a = 0; a < dim; ++a) arg += kTwoPi * q[j][a] * x[a] / period;
      v += coeff[j] * std::cos(arg);
    }
    return v;
  });
  return scaled(f, 1.0 / sup_abs(f));
}

ScalarField spike_field(const std::shared_ptr<const TorusGrid>& grid, double height, double background,
                        double width) {
  if (grid->real_dim() < 3) throw ConfigError("spike: needs at least three real coordinates");
  const double period = grid->period();
  return ScalarField::from_function(grid, [&](const Point& x) {
    double d2 = 0.0;
    for (double xa : x) {
      const double d = std::abs(xa - 0.5 * period);
      const double w = std::min(d, period - d);
      d2 += w * w;
    }
    double v = background * std::sin(kTwoPi * x[1] / period) * std::sin(kTwoPi * x[2] / period);
    if (width > 0.0) v += height * std::exp(-d2 / (2.0 * width * width));
    return v;
  });
}

double tune_spike_width(const std::shared_ptr<const TorusGrid>& grid, double height, double background,
                        double excess, double p) {
  if (!(excess > 0.0)) throw ConfigError("spike: entropy_excess must be positive");
  const double base = harness::entropy_norm(spike_field(grid, 0.0, background, 0.0), p);
  auto entropy_at = [&](double log_w) {
    return harness::entropy_norm(spike_field(grid, height, background, std::exp(log_w)), p);
  };
  const double h = grid->spacing();
  const double log_w = bisect_increasing(entropy_at, std::log(0.05 * h), std::log(0.25 * grid->period()),
                                         base + excess, "spike width");
  return std::exp(log_w);
}

ScalarField manufactured_potential(const FamilySpec& spec, const FamilyContext& ctx) {
  const int dim = ctx.grid->real_dim();
  std::vector<int> mode = spec.mode;
  if (mode.empty()) {
    mode.assign(dim, 0);
    mode[1] = 1;
  }
  if (static_cast<int>(mode.size()) != dim) throw ConfigError("manufactured: mode needs one entry per real axis");
  const double period = ctx.grid->period();
  return ScalarField::from_function(ctx.grid, [&](const Point& x) {
    double arg = 0.0;
    for (int a = 0; a < dim; ++a) arg += kTwoPi * mode[a] * x[a] / period;
    return spec.amplitude * std::cos(arg);
  });
}

ScalarField make_rhs(const FamilySpec& spec, const FamilyContext& ctx) {
  const auto& grid = ctx.grid;
  if (spec.family == "zero") return ScalarField::zeros(grid);
  if (spec.family == "constant") return ScalarField::constant(grid, spec.value);
  if (spec.family == "trig") {
    const ScalarField unit = trig_field(grid, spec.has_seed ? spec.seed : ctx.seed, spec.terms, spec.max_mode);
    if (spec.entropy > 0.0) {
      const double a = bisect_increasing(
          [&](double amp) { return harness::entropy_norm(scaled(unit, amp), ctx.p); }, 0.0, 50.0, spec.entropy,
          "trig entropy");
      return scaled(unit, a);
    }
    return scaled(unit, spec.amplitude);
  }
  if (spec.family == "spike") {
    double width = spec.width;
    if (!(width > 0.0)) width = tune_spike_width(grid, spec.height, spec.background, spec.entropy_excess, ctx.p);
    return spike_field(grid, spec.height, spec.background, width);
  }
  if (spec.family == "manufactured") {
    const int n = grid->n();
    const auto g = geometry::HermitianField::constant(grid, Matrix::Identity(n, n));
    const auto J = geometry::ComplexStructureJ::standard(grid->m());
    return solver::manufacture_rhs(ctx.kind, manufactured_potential(spec, ctx), g, &g, J);
  }
  throw ConfigError("unknown F family '" + spec.family + "'");
}

}  // namespace qmalab::cli
