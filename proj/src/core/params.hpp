#ifndef PFS_CORE_PARAMS_HPP
#define PFS_CORE_PARAMS_HPP

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace pfs {

// Physical and model constants for the coupled thermal-solute phase field
// model of a binary alloy. Defaults are the standard parameter set used
// throughout; anything can be overridden from the run configuration.
//
// The anisotropy constants A0 and eps~ are always derived from epsilon so
// they can never drift out of step with it.
struct ModelParams {
  double epsilon = 0.02;    // cubic anisotropy strength, must stay in [0, 1/3)
  double mc_inf = 0.05;     // scaled boundary concentration M c_inf
  double k_e = 0.3;         // equilibrium partition coefficient, in (0, 1]
  double lambda = 2.0;      // dimensionless interface width coupling
  double d_c = 1.2534;      // solute diffusivity
  double lewis = 40.0;      // Le = D_theta / D_c
  double delta = 0.525;     // undercooling at the far boundary
  double r0 = 5.0;          // initial seed radius
  double alpha_seed = 0.6;  // initial tanh profile steepness

  // Treat |grad phi|^2 <= q_threshold as a degenerate gradient. Zero means
  // "exact floating point zero"; a small positive value is available for
  // robustness experiments.
  double q_threshold = 0.0;

  // Optional dimensionalization constants for recovering physical
  // temperature. Unset (NaN) unless configured.
  double t_m = std::numeric_limits<double>::quiet_NaN();       // melting temperature
  double m_slope = std::numeric_limits<double>::quiet_NaN();   // liquidus slope m
  double latent_l = std::numeric_limits<double>::quiet_NaN();  // latent heat L
  double c_p = std::numeric_limits<double>::quiet_NaN();       // heat capacity C_p
  double c_inf = 1.0;                                          // physical far-field concentration

  double a0() const { return 1.0 - 3.0 * epsilon; }
  double eps_tilde() const { return 4.0 * epsilon / (1.0 - 3.0 * epsilon); }
  double d_theta() const { return lewis * d_c; }

  bool has_dimensional_constants() const {
    return std::isfinite(t_m) && std::isfinite(m_slope) && std::isfinite(latent_l) &&
           std::isfinite(c_p);
  }

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0 / 3.0))
      throw config_error("epsilon must lie in [0, 1/3)");
    if (!(k_e > 0.0 && k_e <= 1.0)) throw config_error("k_e must lie in (0, 1]");
    if (!(lewis >= 1.0)) throw config_error("lewis must be >= 1");
    if (!(d_c > 0.0)) throw config_error("d_c must be positive");
    if (!(lambda > 0.0)) throw config_error("lambda must be positive");
    if (!(mc_inf >= 0.0)) throw config_error("mc_inf must be nonnegative");
    if (!(r0 > 0.0)) throw config_error("r0 must be positive");
    if (!(alpha_seed > 0.0)) throw config_error("alpha_seed must be positive");
    if (!(q_threshold >= 0.0)) throw config_error("q_threshold must be nonnegative");
  }
};

}  // namespace pfs

#endif
