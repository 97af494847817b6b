// Pointwise constitutive kernels: anisotropy, bulk driving force, relaxation
// time, variable transforms. All pure functions, safe to call concurrently.

#include "core/model.hpp"

#include <cmath>
#include <string>

namespace pfs {

GradientData anisotropy(const Vec3& grad_phi, const ModelParams& p) {
  GradientData gd;
  gd.grad = grad_phi;
  gd.q = norm2(grad_phi);
  const double a0 = p.a0();
  const double et = p.eps_tilde();
  if (gd.q <= p.q_threshold) {
    gd.degenerate = true;
    gd.x_comp = {0, 0, 0};
    gd.a_val = a0 * (1.0 + et);
    return gd;
  }
  gd.degenerate = false;
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    gd.x_comp[i] = grad_phi[i] * grad_phi[i] / gd.q;
    s += gd.x_comp[i] * gd.x_comp[i];
  }
  gd.a_val = a0 * (1.0 + et * s);
  return gd;
}

Vec3 g_vector(const GradientData& gd, const ModelParams& p) {
  const double a0 = p.a0();
  const double et = p.eps_tilde();
  const double a = gd.a_val;
  Vec3 g;
  for (int i = 0; i < 3; ++i)
    g[i] = gd.grad[i] * a * a + 4.0 * gd.grad[i] * (a0 * gd.x_comp[i] * et - a + a0) * a;
  return g;
}

Sym3 g_matrix(const GradientData& gd, const ModelParams& p) {
  const double a0 = p.a0();
  const double et = p.eps_tilde();
  if (et == 0.0) {
    // Isotropic limit: g_ij = A0^2 delta_ij identically.
    Sym3 g;
    g.xx = g.yy = g.zz = a0 * a0;
    return g;
  }
  const double a = gd.a_val;
  const double a2 = a * a;

  auto diag = [&](double xi) {
    return (24.0 * xi - 3.0) * a2 +
           (-48.0 * xi * xi * et + 12.0 * xi * et - 40.0 * xi + 4.0) * a0 * a +
           16.0 * xi * (xi * et + 1.0) * (xi * et + 1.0) * a0 * a0;
  };
  // Off-diagonal bracket shares the quadratic-in-A structure; the prefactor
  // is phi_,i phi_,j / q.
  auto offd = [&](int i, int j) {
    const double xi = gd.x_comp[i], xj = gd.x_comp[j];
    const double bracket = 24.0 * a2 + (-24.0 * xi * et - 24.0 * xj * et - 40.0) * a0 * a +
                           16.0 * (xj * et + 1.0) * (xi * et + 1.0) * a0 * a0;
    return gd.grad[i] * gd.grad[j] / gd.q * bracket;
  };

  Sym3 g;
  g.xx = diag(gd.x_comp[0]);
  g.yy = diag(gd.x_comp[1]);
  g.zz = diag(gd.x_comp[2]);
  g.xy = offd(0, 1);
  g.yz = offd(1, 2);
  g.xz = offd(0, 2);
  return g;
}

Sym3 g_matrix(const Vec3& grad_phi, const ModelParams& p) {
  return g_matrix(anisotropy(grad_phi, p), p);
}

double bulk_driving_force(double phi, double u, double theta, const ModelParams& p) {
  const double phi2 = phi * phi;
  return phi * phi2 - phi +
         p.lambda * (theta + p.mc_inf * u) * (1.0 - 2.0 * phi2 + phi2 * phi2);
}

double relaxation_time(double u, const ModelParams& p) {
  const double tau = 1.0 / p.lewis + p.mc_inf * (1.0 + (1.0 - p.k_e) * u);
  if (!(tau > 0.0))
    throw numeric_error("nonpositive relaxation time tau = " + std::to_string(tau) +
                        " at U = " + std::to_string(u));
  return tau;
}

double u_from_c(double c_over_cinf, double phi, const ModelParams& p) {
  const double denom = 1.0 + p.k_e - (1.0 - p.k_e) * phi;
  return (2.0 * c_over_cinf / denom - 1.0) / (1.0 - p.k_e);
}

double c_from_u(double u, double phi, const ModelParams& p) {
  const double denom = 1.0 + p.k_e - (1.0 - p.k_e) * phi;
  return 0.5 * (1.0 + (1.0 - p.k_e) * u) * denom;
}

double solute_mobility(double phi, const ModelParams& p) {
  return p.d_c * 0.5 * (1.0 - phi);
}

double physical_temperature(double theta, const ModelParams& p) {
  if (!p.has_dimensional_constants())
    throw config_error("physical_temperature requires t_m, m_slope, latent_l and c_p");
  return theta * p.latent_l / p.c_p + p.t_m + p.m_slope * p.c_inf;
}

}  // namespace pfs
