#ifndef PFS_CORE_DIAGNOSTICS_HPP
#define PFS_CORE_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "core/mesh.hpp"
#include "core/params.hpp"

namespace pfs {

// Tip state extracted from the phi = 0 crossing on the positive x axis.
// x_tip is the sub-cell interpolated crossing; the radius may be undefined
// for a flat interface (curvature below resolution).
struct TipEstimate {
  double x_tip = 0.0;
  double radius = 0.0;
  bool radius_defined = false;
};

// Curvature radius at the dendrite tip from the near-axis cell rows
// (y,z) = (dx/2, dx/2) and (3dx/2, 3dx/2), using the reflection symmetry of
// the octant domain:
//   r = phi_x / phi_uu + phi / phi_x,  u = (y+z)/sqrt(2)
//   phi_x  = (phi_{i+1} - phi_{i-1}) / (2 dx)        on the (dx/2, dx/2) row
//   phi_uu = (-phi_i + phi_i^{(3/2 row)}) / (2 dx^2)
// Guard cells of the inspected plane must be current. Returns nullopt when
// no crossing exists.
std::optional<TipEstimate> tip_radius(const OctreeMesh& mesh, Plane p);

// One diagnostics row per accepted step.
struct TipSample {
  double t = 0.0;
  double x_tip = 0.0;
  double radius = 0.0;
  double velocity = 0.0;
  std::uint64_t dof = 0;
  int cycles = 0;
  double wall_ms = 0.0;
  bool radius_defined = false;
};

// Time series of tip samples. Velocities are least-squares slopes of x_tip
// over a trailing window (default 5 samples), recomputed as samples arrive.
class TipSeries {
 public:
  explicit TipSeries(int window = 5) : window_(window) {}

  int window() const { return window_; }
  void set_window(int w) { window_ = w < 2 ? 2 : w; }
  const std::vector<TipSample>& samples() const { return samples_; }
  std::vector<TipSample>& samples() { return samples_; }

  // Appends and fills in sample.velocity from the trailing window.
  void append(TipSample sample);

 private:
  int window_;
  std::vector<TipSample> samples_;
};

// Least-squares slope of x_tip(t) over the last `window` samples ending at
// index `last` (inclusive). Zero when fewer than two samples exist.
double tip_velocity(const std::vector<TipSample>& samples, std::size_t last, int window);

// Integral of c(phi, U) over leaf cells (c relative to c_inf), summed in
// Morton order so the value is independent of worker count and history.
double total_solute(const OctreeMesh& mesh, const ModelParams& params, Plane p);

// Integral of .5 A(n)^2 |grad phi|^2 + f(theta, phi) over leaf cells, with
// cell-centered gradients. Guard cells must be current.
double free_energy(const OctreeMesh& mesh, const ModelParams& params, Plane p);

// Min/max of one variable over leaf cells.
std::pair<double, double> field_range(const OctreeMesh& mesh, Var v, Plane p);

struct CharScales {
  double d0 = 0.0;                 // capillary length 5 sqrt(2) / (8 lambda)
  std::optional<double> t0;        // 0.80 d0_dim^2 lambda^3 / dc_dim when given
};

CharScales characteristic_scales(const ModelParams& params,
                                 std::optional<double> d0_dim = std::nullopt,
                                 std::optional<double> dc_dim = std::nullopt);

}  // namespace pfs

#endif
