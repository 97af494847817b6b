// Compact 3^3 discrete operators and the assembled right-hand sides for the
// phase, solute and temperature equations on one cell.

#include "core/stencil.hpp"

#include <cmath>

namespace pfs {

namespace {
constexpr double kCenterWeight = -128.0 / 30.0;  // 27-point Laplacian center
constexpr double kFaceWeight = 14.0 / 30.0;
constexpr double kEdgeWeight = 3.0 / 30.0;
constexpr double kCornerWeight = 1.0 / 30.0;
}  // namespace

double laplacian27(const StencilPatch& u) {
  double faces = u.at(1, 0, 0) + u.at(-1, 0, 0) + u.at(0, 1, 0) + u.at(0, -1, 0) +
                 u.at(0, 0, 1) + u.at(0, 0, -1);
  double edges = u.at(1, 1, 0) + u.at(1, -1, 0) + u.at(-1, 1, 0) + u.at(-1, -1, 0) +
                 u.at(1, 0, 1) + u.at(1, 0, -1) + u.at(-1, 0, 1) + u.at(-1, 0, -1) +
                 u.at(0, 1, 1) + u.at(0, 1, -1) + u.at(0, -1, 1) + u.at(0, -1, -1);
  double corners = u.at(1, 1, 1) + u.at(1, 1, -1) + u.at(1, -1, 1) + u.at(1, -1, -1) +
                   u.at(-1, 1, 1) + u.at(-1, 1, -1) + u.at(-1, -1, 1) + u.at(-1, -1, -1);
  return (kCenterWeight * u.mid() + kFaceWeight * faces + kEdgeWeight * edges +
          kCornerWeight * corners) /
         (u.dx * u.dx);
}

Vec3 gradient_centered(const StencilPatch& u) {
  const double inv2dx = 1.0 / (2.0 * u.dx);
  return {(u.at(1, 0, 0) - u.at(-1, 0, 0)) * inv2dx,
          (u.at(0, 1, 0) - u.at(0, -1, 0)) * inv2dx,
          (u.at(0, 0, 1) - u.at(0, 0, -1)) * inv2dx};
}

namespace {
inline double cross_second(const StencilPatch& u, int ax, int bx) {
  // d^2 u / da db over 4 dx^2 from the four diagonal neighbors in the a-b
  // plane; ax/bx select the axes (0,1,2).
  auto pick = [&](int sa, int sb) {
    int o[3] = {0, 0, 0};
    o[ax] = sa;
    o[bx] = sb;
    return u.at(o[0], o[1], o[2]);
  };
  return (pick(1, 1) + pick(-1, -1) - pick(1, -1) - pick(-1, 1)) / (4.0 * u.dx * u.dx);
}
}  // namespace

Sym3 m_matrix(const StencilPatch& u) {
  const double invdx2 = 1.0 / (u.dx * u.dx);
  const double face_sum = u.at(1, 0, 0) + u.at(-1, 0, 0) + u.at(0, 1, 0) + u.at(0, -1, 0) +
                          u.at(0, 0, 1) + u.at(0, 0, -1);
  const double third = face_sum / 3.0;
  Sym3 m;
  m.xx = (u.at(1, 0, 0) + u.at(-1, 0, 0) - third) * invdx2;
  m.yy = (u.at(0, 1, 0) + u.at(0, -1, 0) - third) * invdx2;
  m.zz = (u.at(0, 0, 1) + u.at(0, 0, -1) - third) * invdx2;
  m.xy = cross_second(u, 0, 1);
  m.yz = cross_second(u, 1, 2);
  m.xz = cross_second(u, 0, 2);
  return m;
}

Sym3 hessian(const StencilPatch& u) {
  const double invdx2 = 1.0 / (u.dx * u.dx);
  const double c2 = 2.0 * u.mid();
  Sym3 h;
  h.xx = (u.at(1, 0, 0) - c2 + u.at(-1, 0, 0)) * invdx2;
  h.yy = (u.at(0, 1, 0) - c2 + u.at(0, -1, 0)) * invdx2;
  h.zz = (u.at(0, 0, 1) - c2 + u.at(0, 0, -1)) * invdx2;
  h.xy = cross_second(u, 0, 1);
  h.yz = cross_second(u, 1, 2);
  h.xz = cross_second(u, 0, 2);
  return h;
}

PhiPatchData analyze_phi_patch(const StencilPatch& phi, const ModelParams& p) {
  PhiPatchData pd;
  pd.lap = laplacian27(phi);
  pd.gd = anisotropy(gradient_centered(phi), p);
  if (pd.gd.degenerate || p.eps_tilde() == 0.0) {
    // Degenerate gradient or the isotropic limit: the contraction collapses
    // to A^2 lap(phi) with A = A0 (1 + eps~) resp. A0.
    pd.reduced = true;
    pd.a2 = pd.gd.a_val * pd.gd.a_val;
    pd.aniso_div = pd.a2 * pd.lap;
    return pd;
  }
  pd.g = g_matrix(pd.gd, p);
  pd.m = m_matrix(phi);
  pd.aniso_div = pd.lap * pd.g.trace() / 3.0 + pd.m.contract(pd.g);
  pd.a2 = pd.gd.a_val * pd.gd.a_val;
  return pd;
}

double aniso_div(const StencilPatch& phi, const ModelParams& p) {
  return analyze_phi_patch(phi, p).aniso_div;
}

double rhs_phi(const PhiPatchData& pd, double phi_center, double u_center,
               double theta_center, const ModelParams& p) {
  const double tau = relaxation_time(u_center, p);
  return (pd.aniso_div - bulk_driving_force(phi_center, u_center, theta_center, p)) /
         (tau * pd.a2);
}

double rhs_phi(const StencilPatch& phi, double u_center, double theta_center,
               const ModelParams& p) {
  return rhs_phi(analyze_phi_patch(phi, p), phi.mid(), u_center, theta_center, p);
}

double rhs_theta(const StencilPatch& theta, double phi_dot_center, const ModelParams& p) {
  return p.d_theta() * laplacian27(theta) + 0.5 * phi_dot_center;
}

namespace detail {

// Shared body for rhs_u and its U_p-derivative. F_U is exactly linear in the
// center unknown: the Laplacian center weight, the release term and the
// anti-trapping pieces proportional to U_p.
double rhs_u_impl(const PhiPatchData& pd, const StencilPatch& u, const StencilPatch& phi_new,
                  const StencilPatch& phi_star, double dt_eff, const ModelParams& p,
                  double* df_du) {
  const double phi_c = phi_new.mid();
  const double u_c = u.mid();
  const double k = p.k_e;

  const double lap_u = laplacian27(u);
  const Vec3 grad_u = gradient_centered(u);

  const double mob_c = p.d_c * 0.5 * (1.0 - phi_c);
  const double diffusion = mob_c * lap_u - p.d_c * 0.5 * dot(pd.gd.grad, grad_u);

  const double phi_dot = (phi_c - phi_star.mid()) / dt_eff;
  const double release = 0.5 * (1.0 + (1.0 - k) * u_c) * phi_dot;

  double div_j = 0.0;
  double ddivj_du = 0.0;
  if (!pd.gd.degenerate) {
    const double sq = std::sqrt(pd.gd.q);
    const Vec3 n = {pd.gd.grad[0] / sq, pd.gd.grad[1] / sq, pd.gd.grad[2] / sq};
    const Vec3 grad_star = gradient_centered(phi_star);
    const Vec3 grad_dot = {(pd.gd.grad[0] - grad_star[0]) / dt_eff,
                           (pd.gd.grad[1] - grad_star[1]) / dt_eff,
                           (pd.gd.grad[2] - grad_star[2]) / dt_eff};
    const Sym3 h = hessian(phi_new);
    const double nhn = h.xx * n[0] * n[0] + h.yy * n[1] * n[1] + h.zz * n[2] * n[2] +
                       2.0 * (h.xy * n[0] * n[1] + h.yz * n[1] * n[2] + h.xz * n[0] * n[2]);
    const double div_n = (pd.lap - nhn) / sq;
    const double at = (1.0 + (1.0 - k)) / (2.0 * std::sqrt(2.0));
    const double div_u_dot_n = phi_dot * dot(grad_u, n) + u_c * dot(grad_dot, n) +
                               u_c * phi_dot * div_n;
    div_j = -at * div_u_dot_n;
    ddivj_du = -at * (dot(grad_dot, n) + phi_dot * div_n);
  }

  const double denom = 0.5 * (1.0 + k) - 0.5 * (1.0 - k) * phi_c;
  if (df_du) {
    const double dlap = kCenterWeight / (u.dx * u.dx);
    *df_du = (mob_c * dlap + ddivj_du + 0.5 * (1.0 - k) * phi_dot) / denom;
  }
  return (diffusion + div_j + release) / denom;
}

}  // namespace detail

double rhs_u(const PhiPatchData& pd, const StencilPatch& u, const StencilPatch& phi_new,
             const StencilPatch& phi_star, double dt_eff, const ModelParams& p) {
  return detail::rhs_u_impl(pd, u, phi_new, phi_star, dt_eff, p, nullptr);
}

double rhs_u(const StencilPatch& u, const StencilPatch& phi_new, const StencilPatch& phi_star,
             double dt_eff, const ModelParams& p) {
  return detail::rhs_u_impl(analyze_phi_patch(phi_new, p), u, phi_new, phi_star, dt_eff, p,
                            nullptr);
}

double rhs_u_with_diag(const PhiPatchData& pd, const StencilPatch& u,
                       const StencilPatch& phi_new, const StencilPatch& phi_star,
                       double dt_eff, const ModelParams& p, double* df_du) {
  return detail::rhs_u_impl(pd, u, phi_new, phi_star, dt_eff, p, df_du);
}

}  // namespace pfs
