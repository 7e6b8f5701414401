#pragma once

// Grids, fields and differential operators on flat hyperhermitian models.
//
// Node ordering everywhere is row-major lexicographic in the real
// coordinates (x_0, x_1, ..., x_{2n-1}), last coordinate fastest. The complex
// coordinate z_j is x_{2j} + i x_{2j+1}.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qmalab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Point = std::vector<double>;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace geometry {

class TorusGrid {
 public:
  TorusGrid(int m, int res, double period);

  int m() const { return m_; }
  int n() const { return 2 * m_; }
  int real_dim() const { return 4 * m_; }
  int res() const { return res_; }
  double period() const { return period_; }
  double spacing() const { return period_ / res_; }
  std::size_t node_count() const { return node_count_; }
  double volume() const;
  double cell_volume() const;

  void multi_index(std::size_t node, std::span<int> out) const;
  // Periodic: indices are reduced modulo res.
  std::size_t node_index(std::span<const int> idx) const;
  Point coordinates(std::size_t node) const;

 private:
  int m_;
  int res_;
  double period_;
  std::size_t node_count_;
};

enum class NodeKind : std::uint8_t { interior = 0, boundary = 1, exterior = 2 };

// Cube of nodes around `center` with the closed ball of `radius` marked.
// Interior nodes have all 4n axis neighbours inside the closed ball; boundary
// nodes are the remaining nodes adjacent to an interior node.
class BallGrid {
 public:
  BallGrid(int n, Point center, double radius, double spacing);

  int n() const { return n_; }
  int real_dim() const { return 2 * n_; }
  const Point& center() const { return center_; }
  double radius() const { return radius_; }
  double spacing() const { return spacing_; }
  int half_width() const { return half_; }
  int points_per_dim() const { return 2 * half_ + 1; }
  std::size_t node_count() const { return kinds_.size(); }
  double cell_volume() const;

  NodeKind kind(std::size_t node) const { return kinds_[node]; }
  bool in_closed_ball(std::size_t node) const { return kinds_[node] != NodeKind::exterior; }
  std::size_t count(NodeKind k) const;

  // Offsets from the center in units of spacing, each in [-half, half].
  void offsets(std::size_t node, std::span<int> out) const;
  std::optional<std::size_t> node_at(std::span<const int> offsets) const;
  Point coordinates(std::size_t node) const;
  double distance2(std::size_t node) const;

 private:
  int n_;
  Point center_;
  double radius_;
  double spacing_;
  int half_;
  std::vector<NodeKind> kinds_;
};

using GridHandle = std::variant<std::shared_ptr<const TorusGrid>, std::shared_ptr<const BallGrid>>;

bool same_grid(const GridHandle& a, const GridHandle& b);
std::size_t node_count(const GridHandle& grid);
int complex_dim(const GridHandle& grid);

// Real-valued grid function.
class ScalarField {
 public:
  ScalarField(GridHandle grid, std::vector<double> values);
  static ScalarField zeros(const GridHandle& grid);
  static ScalarField constant(const GridHandle& grid, double value);
  // Rejects values whose imaginary part exceeds `tol`.
  static ScalarField from_complex(const GridHandle& grid, std::span<const Complex> values,
                                  double tol = 1e-12);

  template <class Fn>
  static ScalarField from_function(const GridHandle& grid, Fn&& fn);

  const GridHandle& grid() const { return grid_; }
  bool on_torus() const { return std::holds_alternative<std::shared_ptr<const TorusGrid>>(grid_); }
  const TorusGrid& torus() const;
  const BallGrid& ball() const;

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double max() const;
  double min() const;
  // Lexicographically first node attaining the minimum.
  std::size_t argmin() const;

 private:
  GridHandle grid_;
  std::vector<double> values_;
};

// One n x n complex matrix per node, stored contiguously (column-major per node).
class HermitianField {
 public:
  HermitianField(GridHandle grid, int dim);
  static HermitianField constant(const GridHandle& grid, const Matrix& value);

  const GridHandle& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::size_t size() const { return count_; }

  Eigen::Map<Matrix> at(std::size_t node) {
    return Eigen::Map<Matrix>(data_.data() + node * dim_ * dim_, dim_, dim_);
  }
  Eigen::Map<const Matrix> at(std::size_t node) const {
    return Eigen::Map<const Matrix>(data_.data() + node * dim_ * dim_, dim_, dim_);
  }

  double hermiticity_defect() const;
  // Minimum eigenvalue over the nodes selected by `mask` (all nodes when empty).
  double min_eigenvalue(std::span<const std::uint8_t> mask = {}) const;

 private:
  GridHandle grid_;
  int dim_;
  std::size_t count_;
  std::vector<Complex> data_;
};

// J_i^{\bar beta} as a constant n x n complex matrix.
class ComplexStructureJ {
 public:
  struct Defects {
    double unitarity;     // |M M^dagger - I|
    double square;        // |M conj(M) + I|
    double antisymmetry;  // |M^T + M|
  };

  explicit ComplexStructureJ(Matrix m, double tol = 1e-12);
  static ComplexStructureJ standard(int m);
  // Skips validation; used to inject broken structures in negative controls.
  static ComplexStructureJ unchecked(Matrix m);

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  Defects defects() const;
  // Throws InvalidArgument naming the first violated invariant.
  void validate(double tol = 1e-12) const;

 private:
  struct NoCheck {};
  ComplexStructureJ(Matrix m, NoCheck) : m_(std::move(m)) {}
  Matrix m_;
};

struct FlatModel {
  std::shared_ptr<const TorusGrid> grid;
  HermitianField g;
  ComplexStructureJ J;
};

FlatModel make_flat_model(int m, int res, double period);

// --- pointwise algebra shared by the operators ---------------------------

// Complex Hessian u_{j\bar k} from the real Hessian D_{ab} (2n x 2n).
Matrix complex_from_real_hessian(const RealMatrix& real_hessian);
// 1/2 (P + M conj(P) M^dagger): the twisted Hessian of a complex Hessian P.
Matrix twist(const Matrix& complex_hessian, const Matrix& j);
// Sum_{ij} U[i][j] V[i][j]; the real part of the index contraction U^{i\bar j} V_{i\bar j}.
double contract(const Matrix& upper, const Matrix& lower);
// The contravariant tensor g^{i\bar j}, i.e. conj(g^{-1}), via eigendecomposition.
Matrix inverse_upper(const Matrix& g);

// --- field operators ----------------------------------------------------

// phi_{i\bar j}. Spectral on the torus; centered differences at interior ball
// nodes (non-interior ball nodes carry zero).
HermitianField complex_hessian(const ScalarField& phi);
// Single interior ball node; throws for boundary or exterior nodes.
Matrix complex_hessian_at(const ScalarField& phi, std::size_t node);
HermitianField twisted_hessian(const ScalarField& phi, const ComplexStructureJ& J);
// Delta_{I,g} psi = g^{i\bar j} H(psi)_{i\bar j}.
ScalarField quaternionic_laplacian(const ScalarField& psi, const HermitianField& g,
                                   const ComplexStructureJ& J);

// Uniform-node quadrature. On a ball the sum runs over the closed-ball nodes.
double integrate(const ScalarField& f);
double integrate(const ScalarField& f, const ScalarField& weight);

// Values of a torus field at the nodes of a ball whose center is a torus node
// and whose spacing equals the torus spacing (periodic wrap).
ScalarField restrict_to_ball(const ScalarField& torus_field,
                             const std::shared_ptr<const BallGrid>& ball);

// Ball centred at a torus node with the torus spacing.
std::shared_ptr<const BallGrid> ball_at_node(const TorusGrid& torus, std::size_t node,
                                             double radius);

template <class Fn>
ScalarField ScalarField::from_function(const GridHandle& grid, Fn&& fn) {
  std::vector<double> values(node_count(grid));
  std::visit(
      [&](const auto& g) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(g->coordinates(i));
      },
      grid);
  return ScalarField(grid, std::move(values));
}

}  // namespace geometry
}  // namespace qmalab
