#include "qmalab/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmalab::geometry {

ScalarField::ScalarField(GridHandle grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != node_count(grid_)) {
    throw InvalidArgument("scalar field: value count does not match node count");
  }
}

ScalarField ScalarField::zeros(const GridHandle& grid) { return constant(grid, 0.0); }

ScalarField ScalarField::constant(const GridHandle& grid, double value) {
  return ScalarField(grid, std::vector<double>(node_count(grid), value));
}

ScalarField ScalarField::from_complex(const GridHandle& grid, std::span<const Complex> values,
                                      double tol) {
  std::vector<double> re(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(values[i].imag()) > tol) {
      throw InvalidArgument("scalar field: non-real value at node " + std::to_string(i));
    }
    re[i] = values[i].real();
  }
  return ScalarField(grid, std::move(re));
}

const TorusGrid& ScalarField::torus() const {
  if (!on_torus()) throw InvalidArgument("field is not on a torus grid");
  return *std::get<std::shared_ptr<const TorusGrid>>(grid_);
}

const BallGrid& ScalarField::ball() const {
  if (on_torus()) throw InvalidArgument("field is not on a ball grid");
  return *std::get<std::shared_ptr<const BallGrid>>(grid_);
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

std::size_t ScalarField::argmin() const {
  // min_element returns the first minimum, i.e. lexicographic tie-breaking.
  return static_cast<std::size_t>(std::min_element(values_.begin(), values_.end()) - values_.begin());
}

HermitianField::HermitianField(GridHandle grid, int dim)
    : grid_(std::move(grid)), dim_(dim), count_(node_count(grid_)) {
  if (dim < 1) throw InvalidArgument("hermitian field: dimension must be positive");
  data_.assign(count_ * dim_ * dim_, Complex(0.0, 0.0));
}

HermitianField HermitianField::constant(const GridHandle& grid, const Matrix& value) {
  HermitianField f(grid, static_cast<int>(value.rows()));
  for (std::size_t i = 0; i < f.size(); ++i) f.at(i) = value;
  return f;
}

double HermitianField::hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    const auto a = at(i);
    worst = std::max(worst, (a - a.adjoint()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double HermitianField::min_eigenvalue(std::span<const std::uint8_t> mask) const {
  double worst = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(dim_);
  for (std::size_t i = 0; i < count_; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    eig.compute(at(i), Eigen::EigenvaluesOnly);
    worst = std::min(worst, eig.eigenvalues()(0));
  }
  return worst;
}

}  // namespace qmalab::geometry
