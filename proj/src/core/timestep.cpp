#include "core/timestep.hpp"

#include <cmath>
#include <cstring>

namespace pfs {

Bdf2Coeffs bdf2_coeffs(double ratio) {
  if (!(ratio > 0.0)) throw config_error("BDF2 step ratio must be positive");
  const double d = 2.0 * ratio + 1.0;
  return {(ratio + 1.0) / d, (ratio + 1.0) * (ratio + 1.0) / d, ratio * ratio / d};
}

DtDecision adapt_dt(const StepController& c, int cycles_used, bool converged, double dt) {
  if (!converged) return {dt * c.shrink, true};
  if (cycles_used <= c.v_min) return {dt * c.growth, false};
  if (cycles_used > c.v_max) return {dt * c.shrink, false};
  return {dt, false};
}

void TimeHistory::set_dt_next(double dt) {
  dt_next = dt;
  if (have_two_levels) {
    ratio = dt_next / dt_prev;
    coeffs = bdf2_coeffs(ratio);
  } else {
    ratio = 1.0;
    coeffs = {1.0, 1.0, 0.0};  // backward Euler bootstrap
  }
}

void initialize(OctreeMesh& mesh, const ModelParams& params) {
  params.validate();
  const int s = mesh.side();
  for (int id = 0; id < int(mesh.slot_count()); ++id) {
    Block& b = mesh.block(id);
    if (!b.alive()) continue;
    double* phi = mesh.plane(id, Var::phi, Plane::old);
    double* u = mesh.plane(id, Var::u, Plane::old);
    double* theta = mesh.plane(id, Var::theta, Plane::old);
    for (int k = 0; k < s; ++k)
      for (int j = 0; j < s; ++j)
        for (int i = 0; i < s; ++i) {
          const Vec3 x = mesh.cell_center(b, i, j, k);
          const double r = std::sqrt(dot(x, x));
          const int c = mesh.cell_index(i, j, k);
          phi[c] = -std::tanh(params.alpha_seed * (r - params.r0));
          u[c] = 0.0;
          theta[c] = -params.delta + 0.5 * params.delta * (phi[c] + 1.0);
        }
    for (Var v : {Var::phi, Var::u, Var::theta}) {
      std::memcpy(mesh.plane(id, v, Plane::old2), mesh.plane(id, v, Plane::old),
                  mesh.plane_size() * sizeof(double));
      std::memcpy(mesh.plane(id, v, Plane::cur), mesh.plane(id, v, Plane::old),
                  mesh.plane_size() * sizeof(double));
    }
  }
}

void rebuild_star(OctreeMesh& mesh, const Bdf2Coeffs& coeffs) {
  const std::size_t n = mesh.plane_size();
  for (int id = 0; id < int(mesh.slot_count()); ++id) {
    if (!mesh.block(id).alive()) continue;
    for (Var v : {Var::phi, Var::u, Var::theta}) {
      const double* o1 = mesh.plane(id, v, Plane::old);
      const double* o2 = mesh.plane(id, v, Plane::old2);
      double* star = mesh.plane(id, v, Plane::star);
      for (std::size_t c = 0; c < n; ++c) star[c] = coeffs.r2 * o1[c] - coeffs.r3 * o2[c];
    }
  }
}

void advance_history(OctreeMesh& mesh, TimeHistory& h, double dt_next) {
  const std::size_t bytes = mesh.plane_size() * sizeof(double);
  for (int id = 0; id < int(mesh.slot_count()); ++id) {
    if (!mesh.block(id).alive()) continue;
    for (Var v : {Var::phi, Var::u, Var::theta}) {
      std::memcpy(mesh.plane(id, v, Plane::old2), mesh.plane(id, v, Plane::old), bytes);
      std::memcpy(mesh.plane(id, v, Plane::old), mesh.plane(id, v, Plane::cur), bytes);
    }
  }
  h.time += h.dt_next;
  h.step += 1;
  h.dt_prev = h.dt_next;
  h.have_two_levels = true;
  h.set_dt_next(dt_next);
  rebuild_star(mesh, h.coeffs);
}

}  // namespace pfs
