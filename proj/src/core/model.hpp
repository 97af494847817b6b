#ifndef PFS_CORE_MODEL_HPP
#define PFS_CORE_MODEL_HPP

#include "core/geometry.hpp"
#include "core/params.hpp"

namespace pfs {

// Everything derived from one phase gradient that the anisotropic surface
// energy needs: q = |grad phi|^2, the normalized squared components
// X_i = phi_,i^2 / q, and the anisotropy factor A(n).
//
// When q is at or below the degenerate threshold the normal direction is
// undefined; X is unused and A takes its limiting value A0 (1 + eps~).
struct GradientData {
  Vec3 grad{0, 0, 0};
  double q = 0.0;
  Vec3 x_comp{0, 0, 0};
  double a_val = 0.0;
  bool degenerate = true;
};

// Cubic anisotropy A = A0 (1 + eps~ sum X_i^2), total in the gradient.
GradientData anisotropy(const Vec3& grad_phi, const ModelParams& p);

// g_i = d(.5 A^2 q)/dr_i evaluated at r = grad phi. Requires a
// non-degenerate gradient.
Vec3 g_vector(const GradientData& gd, const ModelParams& p);

// g_ij = d^2(.5 A^2 q)/dr_i dr_j, the symmetric matrix contracted against
// the phase Hessian in the divergence of the anisotropic flux. Requires a
// non-degenerate gradient; callers handle the degenerate limit separately
// (it reduces the whole contraction to A0^2 (1+eps~)^2 lap(phi)).
Sym3 g_matrix(const GradientData& gd, const ModelParams& p);
Sym3 g_matrix(const Vec3& grad_phi, const ModelParams& p);

// d f / d phi of the bulk free energy density:
//   phi^3 - phi + lambda (theta + Mc_inf U)(1 - 2 phi^2 + phi^4).
double bulk_driving_force(double phi, double u, double theta, const ModelParams& p);

// Dimensionless relaxation time tau = 1/Le + Mc_inf [1 + (1 - k_E) U].
// Throws numeric_error when tau <= 0 (parameter misconfiguration).
double relaxation_time(double u, const ModelParams& p);

// Transform between the scaled supersaturation U and the concentration
// c/c_inf at fixed phi. Mutually inverse for phi in [-1, 1].
double u_from_c(double c_over_cinf, double phi, const ModelParams& p);
double c_from_u(double u, double phi, const ModelParams& p);

// Solute diffusion parameter K = D_c (1 - phi)/2.
double solute_mobility(double phi, const ModelParams& p);

// Physical temperature T = theta L/C_p + T_M + m c_inf. Requires the
// dimensionalization constants; throws config_error when absent.
double physical_temperature(double theta, const ModelParams& p);

}  // namespace pfs

#endif
