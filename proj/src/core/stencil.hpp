#ifndef PFS_CORE_STENCIL_HPP
#define PFS_CORE_STENCIL_HPP

#include "core/geometry.hpp"
#include "core/model.hpp"
#include "core/params.hpp"

namespace pfs {

// Strided view of the 27 cells of one variable around a point. The center
// pointer must have valid neighbors at +-1 in each axis (interior plus one
// guard layer is enough for every operator here).
struct StencilPatch {
  const double* center = nullptr;
  int sx = 0, sy = 0, sz = 0;  // strides per axis, in doubles
  double dx = 1.0;

  double at(int a, int b, int c) const { return center[a * sx + b * sy + c * sz]; }
  double mid() const { return *center; }
};

// 27 point Laplacian, weights (-128, 14, 3, 1)/30 by neighbor class.
double laplacian27(const StencilPatch& u);

// Centered first differences over 2 dx in each axis; never reads the center.
Vec3 gradient_centered(const StencilPatch& u);

// M_ij = phi_,ij - (1/3) phi_,kk delta_ij discretised with face-neighbor
// diagonals and 4-point cross differences. Traceless by construction and
// center-free.
Sym3 m_matrix(const StencilPatch& u);

// Full second-derivative matrix: 3-point diagonals (uses the center),
// 4-point cross differences elsewhere.
Sym3 hessian(const StencilPatch& u);

// Everything extracted from a phase-field patch that the right-hand sides
// share: gradient data, the anisotropy matrix, stencil sums. The right-hand
// side entry points below all route through one of these so a fused sweep
// and the standalone functions produce bitwise identical values.
struct PhiPatchData {
  double lap = 0.0;       // 27-point Laplacian of phi
  GradientData gd;        // center-free gradient of phi
  Sym3 g;                 // g_ij (only when !reduced)
  Sym3 m;                 // M_ij, center-free (only when !reduced)
  double aniso_div = 0.0; // (1/3) lap tr(g) + M:g, or a2 lap when reduced
  double a2 = 0.0;        // A^2 used to divide the phase equation
  bool reduced = false;   // degenerate gradient or the isotropic limit
};

PhiPatchData analyze_phi_patch(const StencilPatch& phi, const ModelParams& p);

// Divergence of the anisotropic flux: (1/3) lap(phi) tr(g) + M_ij g_ij,
// falling back to A0^2 (1+eps~)^2 lap(phi) for a degenerate gradient.
double aniso_div(const StencilPatch& phi, const ModelParams& p);

// F_phi = [aniso_div - bulk_driving_force] / (tau A^2).
double rhs_phi(const StencilPatch& phi, double u_center, double theta_center,
               const ModelParams& p);
double rhs_phi(const PhiPatchData& pd, double phi_center, double u_center,
               double theta_center, const ModelParams& p);

// F_theta = D_theta lap(theta) + phi_dot / 2.
double rhs_theta(const StencilPatch& theta, double phi_dot_center, const ModelParams& p);

// F_U: solute diffusion with variable mobility, anti-trapping current
// divergence and solute release, divided by (1+k_E)/2 - (1-k_E) phi/2.
// dt_eff = r1 dt^{n+1}; phi_dot is formed internally from the new and star
// phase patches. The whole anti-trapping divergence is dropped where the
// phase gradient is degenerate (the current vanishes with the interface).
double rhs_u(const StencilPatch& u, const StencilPatch& phi_new,
             const StencilPatch& phi_star, double dt_eff, const ModelParams& p);
double rhs_u(const PhiPatchData& pd, const StencilPatch& u, const StencilPatch& phi_new,
             const StencilPatch& phi_star, double dt_eff, const ModelParams& p);

// Same as rhs_u but also reports dF_U/dU_p, which is exact because F_U is
// linear in the center unknown for frozen neighbors.
double rhs_u_with_diag(const PhiPatchData& pd, const StencilPatch& u,
                       const StencilPatch& phi_new, const StencilPatch& phi_star,
                       double dt_eff, const ModelParams& p, double* df_du);

}  // namespace pfs

#endif
