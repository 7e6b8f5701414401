#pragma once

// Fourier differentiation on a TorusGrid (FFTW-backed).

#include "qmalab/geometry.hpp"

#include <memory>
#include <span>
#include <vector>

namespace qmalab::geometry {

class SpectralOperator {
 public:
  explicit SpectralOperator(std::shared_ptr<const TorusGrid> grid);
  ~SpectralOperator();
  SpectralOperator(const SpectralOperator&) = delete;
  SpectralOperator& operator=(const SpectralOperator&) = delete;

  const TorusGrid& grid() const { return *grid_; }

  // Transforms `values` into Fourier space; subsequent queries refer to it.
  void load(std::span<const double> values);

  // u_{j\bar k} of the loaded field at every node.
  void hessian_entry(int j, int k, std::span<Complex> out);
  HermitianField hessian();

  // out(x) = sum_{ij} upper(x)[i][j] u_{i\bar j}(x) for the loaded field.
  void contract_hessian(const HermitianField& upper, std::span<double> out);

  // Mean-zero solution of sum_{ij} upper[i][j] u_{i\bar j} = rhs for a constant
  // tensor; the mean of rhs is discarded.
  void solve_constant(const Matrix& upper, std::span<const double> rhs, std::span<double> out);

  // d^2 u / dx_a dx_b of the loaded field (real axes a, b).
  void real_second_derivative(int a, int b, std::span<double> out);

 private:
  struct Plans;

  // Visits every Fourier mode with its per-axis index.
  template <class Fn>
  void for_each_mode(Fn&& fn) const;

  std::shared_ptr<const TorusGrid> grid_;
  std::vector<double> wavenumber_;      // per 1-D index
  std::vector<double> wavenumber_odd_;  // Nyquist zeroed
  std::vector<Complex> spectrum_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace qmalab::geometry
