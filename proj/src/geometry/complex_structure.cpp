#include "qmalab/geometry.hpp"

namespace qmalab::geometry {

ComplexStructureJ::ComplexStructureJ(Matrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("J: matrix must be square");
  validate(tol);
}

ComplexStructureJ ComplexStructureJ::standard(int m) {
  if (m < 1) throw InvalidArgument("J: m must be >= 1");
  Matrix block = Matrix::Zero(2 * m, 2 * m);
  for (int q = 0; q < m; ++q) {
    block(2 * q, 2 * q + 1) = 1.0;
    block(2 * q + 1, 2 * q) = -1.0;
  }
  return ComplexStructureJ(std::move(block));
}

ComplexStructureJ ComplexStructureJ::unchecked(Matrix m) { return ComplexStructureJ(std::move(m), NoCheck{}); }

ComplexStructureJ::Defects ComplexStructureJ::defects() const {
  const auto n = m_.rows();
  const Matrix id = Matrix::Identity(n, n);
  return {
      (m_ * m_.adjoint() - id).cwiseAbs().maxCoeff(),
      (m_ * m_.conjugate() + id).cwiseAbs().maxCoeff(),
      (m_.transpose() + m_).cwiseAbs().maxCoeff(),
  };
}

void ComplexStructureJ::validate(double tol) const {
  if (m_.rows() % 2 != 0) throw InvalidArgument("J: dimension must be even");
  const auto d = defects();
  if (d.unitarity > tol) throw InvalidArgument("J invariant violated: unitarity (M M^dagger = I)");
  if (d.square > tol) throw InvalidArgument("J invariant violated: J^2 = -1 (M conj(M) = -I)");
  if (d.antisymmetry > tol) throw InvalidArgument("J invariant violated: antisymmetry (M^T = -M)");
}

FlatModel make_flat_model(int m, int res, double period) {
  if (m < 1) throw InvalidArgument("flat model: m must be >= 1");
  if (res % 2 != 0) throw InvalidArgument("flat model: res must be even");
  auto grid = std::make_shared<const TorusGrid>(m, res, period);
  const int n = grid->n();
  return FlatModel{grid, HermitianField::constant(grid, Matrix::Identity(n, n)),
                   ComplexStructureJ::standard(m)};
}

}  // namespace qmalab::geometry
