#include "qmalab/geometry.hpp"

namespace qmalab::geometry {

namespace {

double weighted_sum(const ScalarField& f, const ScalarField* weight) {
  if (weight && !same_grid(f.grid(), weight->grid())) throw InvalidArgument("integrate: grid mismatch");
  const bool ball = !f.on_torus();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (ball && !f.ball().in_closed_ball(i)) continue;
    sum += weight ? f[i] * (*weight)[i] : f[i];
  }
  const double cell = ball ? f.ball().cell_volume() : f.torus().cell_volume();
  return sum * cell;
}

}  // namespace

double integrate(const ScalarField& f) { return weighted_sum(f, nullptr); }

double integrate(const ScalarField& f, const ScalarField& weight) { return weighted_sum(f, &weight); }

}  // namespace qmalab::geometry
