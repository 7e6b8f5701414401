#pragma once

// Pointwise tensor constructions built from the twisted Hessian:
// the modified metrics g~ and g^, the inverse-type tensors Theta~ and Theta^,
// the operators they induce, and the determinant relations between them.
//
// Upper-index tensors U^{i\bar j} are stored as matrices U[i][j] and contracted
// with lower-index tensors through `geometry::contract`. With this convention
// the upper-index inverse of g is conj(g^{-1}).

#include "qmalab/geometry.hpp"

#include <optional>
#include <span>
#include <vector>

namespace qmalab::pointalg {

using geometry::ComplexStructureJ;
using geometry::HermitianField;
using geometry::ScalarField;

// --- single-point algebra -------------------------------------------------

Matrix g_tilde_point(const Matrix& g, const Matrix& twisted);
// h + (tr_g H * g - H) / (n - 1).
Matrix g_hat_point(const Matrix& h, const Matrix& g, const Matrix& twisted);
// 1/2 (g~^{i\bar j} + g~^{beta\bar alpha} J_beta^{\bar j} J_{\bar alpha}^i).
Matrix theta_tilde_point(const Matrix& g_tilde, const Matrix& j);
Matrix theta_hat_point(const Matrix& g_hat, const Matrix& g, const Matrix& j);
// a^{i\bar j} b_{i\bar j}, i.e. tr_a b.
double trace_against(const Matrix& a, const Matrix& b);
double hermitian_det(const Matrix& a);

// Theta^ in a frame where g = I and g^ = diag(mu): entries
// (sum_{k != i} 1/mu_k) / (n - 1). Exact for J-paired eigenvalues.
std::vector<double> theta_hat_diagonal(std::span<const double> mu);

// det(Theta~) e^F det(g) - 1, zero when det(Theta~) = e^{-F} det(g^{i\bar j}).
double det_identity_residual_point(const Matrix& g_tilde, const Matrix& g, const Matrix& j, double F);
// det(Theta^) - e^{-F} det(g^{i\bar j}).
double det_inequality_gap_point(const Matrix& g_hat, const Matrix& g, const Matrix& j, double F);

// --- fields ---------------------------------------------------------------

HermitianField g_tilde(const HermitianField& g, const ScalarField& phi, const ComplexStructureJ& J);
HermitianField g_hat(const HermitianField& h, const HermitianField& g, const ScalarField& psi,
                     const ComplexStructureJ& J);
HermitianField theta_tilde(const HermitianField& g_tilde, const ComplexStructureJ& J);
HermitianField theta_hat(const HermitianField& g_hat, const HermitianField& g, const ComplexStructureJ& J);

ScalarField det_identity_residual(const HermitianField& g_tilde, const HermitianField& g,
                             const ComplexStructureJ& J, const ScalarField& F);
ScalarField det_inequality_gap(const HermitianField& g_hat, const HermitianField& g, const ComplexStructureJ& J,
                        const ScalarField& F);

// log det(a) - log det(b) per node.
ScalarField log_det_ratio(const HermitianField& a, const HermitianField& b);
// tr_a b per node.
ScalarField trace_field(const HermitianField& a, const HermitianField& b);

// Theta^{i\bar j} v_{i\bar j}; both L (Theta~) and the script-L (Theta^) operator.
ScalarField operator_L(const ScalarField& v, const HermitianField& theta);

struct ConeMembership {
  bool member;
  double margin;  // minimum eigenvalue of the defining matrix over all nodes
};

enum class ConeKind { psh_j, psh_j_n1 };

ConeMembership cone_check(ConeKind kind, const ScalarField& potential, const HermitianField& g,
                          const HermitianField* h, const ComplexStructureJ& J);

// min over nodes of tr_g h + Delta_g psi (ordinary complex Laplacian).
double laplace_positivity_check(const ScalarField& psi, const HermitianField& g, const HermitianField& h,
                                const ComplexStructureJ& J);

}  // namespace qmalab::pointalg
