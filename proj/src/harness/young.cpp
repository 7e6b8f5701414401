#include "qmalab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmalab::harness {

namespace {

// max over F of ((v/2)^p - (1+|F|)^p) e^F, with 0 when the bracket is never positive.
double inner_max(double v, double p) {
  const double ap = std::pow(0.5 * v, p);
  if (ap <= 1.0) return 0.0;
  auto slope = [&](double y) { return ap - std::pow(y, p) - p * std::pow(y, p - 1.0); };
  double y = 1.0;
  if (slope(1.0) > 0.0) {
    double lo = 1.0, hi = 0.5 * v;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    y = 0.5 * (lo + hi);
  }
  return (ap - std::pow(y, p)) * std::exp(y - 1.0);
}

// Dense scan followed by golden-section refinement around the best sample.
template <class Fn>
double maximise(Fn&& fn, double lo, double hi, int samples) {
  double best_x = lo, best = fn(lo);
  const double step = (hi - lo) / samples;
  for (int i = 1; i <= samples; ++i) {
    const double x = lo + i * step;
    const double v = fn(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, b); ++it) {
    const double c = b - ratio * (b - a), d = a + ratio * (b - a);
    if (fn(c) > fn(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return std::max(best, fn(0.5 * (a + b)));
}

}  // namespace

YoungConstants measure_young_constants(double p) {
  if (!(p > 1.0)) throw InvalidArgument("measure_young_constants: p must exceed 1");
  const double Cp = maximise([&](double v) { return inner_max(v, p) * std::exp(-v); }, 0.0, 400.0, 40000);
  const double Cpp = maximise([&](double x) { return p * std::pow(x, 1.0 / p) - x; }, 0.0, 100.0, 100000);
  return {p, Cp * (1.0 + 1e-9), Cpp + 1e-12 * p};
}

double young_margin(double v, double F, double p, double C_p) {
  const double eF = std::exp(F);
  return eF * std::pow(1.0 + std::abs(F), p) + C_p * std::exp(v) - std::pow(0.5 * v, p) * eF;
}

double young_check(const ScalarField& v, const ScalarField& F, double p, double C_p) {
  if (!geometry::same_grid(v.grid(), F.grid())) throw InvalidArgument("young_check: grid mismatch");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) throw InvalidArgument("young_check: v must be nonnegative");
    worst = std::min(worst, young_margin(v[i], F[i], p, C_p));
  }
  return worst;
}

double power_bound_margin(double p, double C_p_prime, const std::vector<double>& xs) {
  double worst = std::numeric_limits<double>::infinity();
  for (double x : xs) worst = std::min(worst, x + C_p_prime - p * std::pow(x, 1.0 / p));
  return worst;
}

}  // namespace qmalab::harness
