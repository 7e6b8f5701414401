#include "qmalab/harness.hpp"

#include <cmath>

namespace qmalab::harness {

namespace {

struct Sides {
  double lhs, rhs;
};

// Both sides at X = S + e^u.
Sides evaluate(const CertificateInput& in, double u) {
  const double lhs = std::pow(in.p, in.p) / std::pow(2.0, in.p + 1.0) * in.c1 * u;
  const double rhs = in.entropy + in.C6 * in.C_p * std::exp(in.C_p_prime) * std::exp(-0.5 * u);
  return {lhs, rhs};
}

}  // namespace

Certificate certify_bound(const CertificateInput& in) {
  if (!(in.c1 > 0.0)) throw InvalidArgument("certify_bound: c1 must be positive");
  if (!(in.S > 0.0) || !(in.p > 0.0)) throw InvalidArgument("certify_bound: S and p must be positive");
  Certificate out;
  out.vacuous = !(in.sup_abs_psi > 2.0);
  const double X = in.sup_abs_psi;
  if (X > in.S) {
    const Sides at = evaluate(in, std::log(X - in.S));
    out.lhs = at.lhs;
    out.rhs = at.rhs;
    out.holds = at.lhs <= at.rhs;
  }

  // lhs - rhs is increasing in X on (S, inf); bisect in u = log(X - S).
  auto excess = [&](double u) {
    const Sides s = evaluate(in, u);
    return s.lhs - s.rhs;
  };
  double lo = std::log(1e-300), hi = 1.0;
  while (excess(hi) <= 0.0 && hi < 1e300) {
    lo = hi;
    hi *= 2.0;
  }
  if (excess(hi) <= 0.0) {
    out.implied_bound = INFINITY;
    out.log_implied_bound = INFINITY;
    return out;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) <= 0.0 ? lo : hi) = mid;
  }
  // X* = S + e^u; log X* computed without overflow.
  const double u = hi;
  const double log_x = u > 30.0 ? u + std::log1p(in.S * std::exp(-u)) : std::log(in.S + std::exp(u));
  if (log_x > std::log(2.0)) {
    out.log_implied_bound = log_x;
    out.implied_bound = std::exp(log_x);  // inf once log_x exceeds ~709
  }
  return out;
}

}  // namespace qmalab::harness
