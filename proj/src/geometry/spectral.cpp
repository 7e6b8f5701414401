#include "qmalab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace qmalab::geometry {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex mutex;
  return mutex;
}
}  // namespace

struct SpectralOperator::Plans {
  fftw_complex* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (buffer) fftw_free(buffer);
  }
};

SpectralOperator::SpectralOperator(std::shared_ptr<const TorusGrid> grid)
    : grid_(std::move(grid)), plans_(std::make_unique<Plans>()) {
  const int res = grid_->res();
  const double scale = 2.0 * std::numbers::pi / grid_->period();
  wavenumber_.resize(res);
  wavenumber_odd_.resize(res);
  for (int q = 0; q < res; ++q) {
    const int signed_q = q <= res / 2 ? q : q - res;
    wavenumber_[q] = scale * signed_q;
    wavenumber_odd_[q] = (2 * q == res) ? 0.0 : scale * signed_q;
  }
  const std::size_t count = grid_->node_count();
  spectrum_.resize(count);

  std::vector<int> dims(grid_->real_dim(), res);
  std::lock_guard lock(planner_mutex());
  plans_->buffer = fftw_alloc_complex(count);
  plans_->forward = fftw_plan_dft(grid_->real_dim(), dims.data(), plans_->buffer, plans_->buffer,
                                  FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft(grid_->real_dim(), dims.data(), plans_->buffer,
                                   plans_->buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SpectralOperator::~SpectralOperator() = default;

template <class Fn>
void SpectralOperator::for_each_mode(Fn&& fn) const {
  const int dim = grid_->real_dim();
  const int res = grid_->res();
  std::vector<int> idx(dim, 0);
  const std::size_t count = grid_->node_count();
  for (std::size_t node = 0; node < count; ++node) {
    fn(node, idx);
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[a] < res) break;
      idx[a] = 0;
    }
  }
}

void SpectralOperator::load(std::span<const double> values) {
  const std::size_t count = grid_->node_count();
  if (values.size() != count) throw InvalidArgument("spectral load: size mismatch");
  auto* buf = plans_->buffer;
  for (std::size_t i = 0; i < count; ++i) {
    buf[i][0] = values[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(plans_->forward);
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) spectrum_[i] = Complex(buf[i][0], buf[i][1]) * inv;
}

namespace {
// Symbol of d_a d_b for the mode with per-axis indices idx.
inline double second_symbol(int a, int b, const std::vector<int>& idx, const std::vector<double>& k,
                            const std::vector<double>& k_odd) {
  if (a == b) return -k[idx[a]] * k[idx[a]];
  return -k_odd[idx[a]] * k_odd[idx[b]];
}
}  // namespace

void SpectralOperator::hessian_entry(int j, int k, std::span<Complex> out) {
  const std::size_t count = grid_->node_count();
  if (out.size() != count) throw InvalidArgument("hessian_entry: size mismatch");
  auto* buf = plans_->buffer;
  const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
  for_each_mode([&](std::size_t node, const std::vector<int>& idx) {
    const double re = 0.25 * (second_symbol(xj, xk, idx, wavenumber_, wavenumber_odd_) +
                              second_symbol(yj, yk, idx, wavenumber_, wavenumber_odd_));
    const double im = 0.25 * (second_symbol(xj, yk, idx, wavenumber_, wavenumber_odd_) -
                              second_symbol(yj, xk, idx, wavenumber_, wavenumber_odd_));
    const Complex v = Complex(re, im) * spectrum_[node];
    buf[node][0] = v.real();
    buf[node][1] = v.imag();
  });
  fftw_execute(plans_->backward);
  for (std::size_t i = 0; i < count; ++i) out[i] = Complex(buf[i][0], buf[i][1]);
}

void SpectralOperator::real_second_derivative(int a, int b, std::span<double> out) {
  const std::size_t count = grid_->node_count();
  auto* buf = plans_->buffer;
  for_each_mode([&](std::size_t node, const std::vector<int>& idx) {
    const Complex v = second_symbol(a, b, idx, wavenumber_, wavenumber_odd_) * spectrum_[node];
    buf[node][0] = v.real();
    buf[node][1] = v.imag();
  });
  fftw_execute(plans_->backward);
  for (std::size_t i = 0; i < count; ++i) out[i] = buf[i][0];
}

HermitianField SpectralOperator::hessian() {
  const int n = grid_->n();
  HermitianField out(grid_, n);
  std::vector<Complex> entry(grid_->node_count());
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      hessian_entry(j, k, entry);
      for (std::size_t i = 0; i < entry.size(); ++i) {
        auto mat = out.at(i);
        if (j == k) {
          mat(j, j) = Complex(entry[i].real(), 0.0);
        } else {
          mat(j, k) = entry[i];
          mat(k, j) = std::conj(entry[i]);
        }
      }
    }
  }
  return out;
}

void SpectralOperator::contract_hessian(const HermitianField& upper, std::span<double> out) {
  const int n = grid_->n();
  const std::size_t count = grid_->node_count();
  if (upper.dim() != n || upper.size() != count || out.size() != count) {
    throw InvalidArgument("contract_hessian: shape mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<Complex> entry(count);
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      hessian_entry(j, k, entry);
      for (std::size_t i = 0; i < count; ++i) {
        const auto u = upper.at(i);
        if (j == k) {
          out[i] += u(j, j).real() * entry[i].real();
        } else {
          // U[j][k] P_jk + U[k][j] conj(P_jk)
          out[i] += (u(j, k) * entry[i] + u(k, j) * std::conj(entry[i])).real();
        }
      }
    }
  }
}

void SpectralOperator::solve_constant(const Matrix& upper, std::span<const double> rhs,
                                      std::span<double> out) {
  const int n = grid_->n();
  const std::size_t count = grid_->node_count();
  load(rhs);
  auto* buf = plans_->buffer;
  for_each_mode([&](std::size_t node, const std::vector<int>& idx) {
    Complex symbol = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
        const double re = 0.25 * (second_symbol(xj, xk, idx, wavenumber_, wavenumber_odd_) +
                                  second_symbol(yj, yk, idx, wavenumber_, wavenumber_odd_));
        const double im = 0.25 * (second_symbol(xj, yk, idx, wavenumber_, wavenumber_odd_) -
                                  second_symbol(yj, xk, idx, wavenumber_, wavenumber_odd_));
        symbol += upper(j, k) * Complex(re, im);
      }
    }
    Complex v = 0.0;
    if (std::abs(symbol) > 1e-300 && node != 0) v = spectrum_[node] / symbol;
    buf[node][0] = v.real();
    buf[node][1] = v.imag();
  });
  fftw_execute(plans_->backward);
  for (std::size_t i = 0; i < count; ++i) out[i] = buf[i][0];
}

}  // namespace qmalab::geometry
