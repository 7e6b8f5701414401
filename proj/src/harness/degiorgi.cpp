#include "qmalab/harness.hpp"

#include <algorithm>
#include <cmath>

namespace qmalab::harness {

double delta0(double p, int n) {
  if (!(p > n)) throw InvalidArgument("delta0: requires p > n");
  return (p - n) / (p * n);
}

APhiFit a_phi_fit(const std::vector<SublevelStats>& stats, double p, int n) {
  APhiFit fit;
  fit.delta0 = delta0(p, n);
  for (const auto& st : stats) {
    if (!(st.Phi > 0.0)) continue;
    fit.C4 = std::max(fit.C4, st.A / std::pow(st.Phi, 1.0 + fit.delta0));
  }
  return fit;
}

double equality_profile_C4(double K, double delta0, double S) {
  const double gamma = 1.0 / delta0;
  return std::pow(K, -delta0) * S * std::pow(gamma / (gamma + 1.0), gamma) / (gamma + 1.0);
}

DeGiorgiResult degiorgi_iterate(double C4, double delta0, const std::function<double(double)>& Phi, double S,
                                const DeGiorgiOptions& options) {
  if (!(C4 > 0.0) || !(delta0 > 0.0) || !(S > 0.0)) {
    throw InvalidArgument("degiorgi_iterate: C4, delta0 and S must be positive");
  }
  DeGiorgiResult out;
  out.c1_geometric = std::pow(S * (1.0 - std::pow(2.0, -delta0)) / (2.0 * C4), 1.0 / delta0);
  out.Phi_top = Phi(S);
  if (!(out.Phi_top > 0.0)) {
    out.violation = std::make_pair(S, 0.0);
    return out;
  }

  double s = S;
  double phi = out.Phi_top;
  double rho = 0.0;
  out.levels.push_back(s);
  for (int j = 0; j < options.max_steps; ++j) {
    const double ratio = std::pow(phi / out.Phi_top, delta0);
    rho += ratio;
    const double t = 2.0 * C4 * std::pow(phi, delta0);
    const double next = s - t;
    const double next_phi = next > 0.0 ? Phi(next) : 0.0;
    if (next > 0.0 && t * next_phi > C4 * std::pow(phi, 1.0 + delta0) * (1.0 + 1e-12)) {
      out.violation = std::make_pair(s, t);
      return out;
    }
    s = next;
    phi = next_phi;
    out.levels.push_back(s);
    if (s <= options.min_level * S) break;
    if (!(phi > 0.0)) {
      out.certifies_zero = true;
      break;
    }
  }
  out.c1 = std::pow(S / (2.0 * C4 * rho), 1.0 / delta0);
  out.converged = true;
  return out;
}

}  // namespace qmalab::harness
