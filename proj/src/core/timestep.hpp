#ifndef PFS_CORE_TIMESTEP_HPP
#define PFS_CORE_TIMESTEP_HPP

#include "core/mesh.hpp"
#include "core/params.hpp"

namespace pfs {

// Variable-ratio BDF2 coefficients, r = dt^{n+1} / dt^n:
//   v^{n+1} - r2 v^n + r3 v^{n-1} = r1 dt^{n+1} F(v^{n+1}).
struct Bdf2Coeffs {
  double r1 = 1.0, r2 = 1.0, r3 = 0.0;
};

Bdf2Coeffs bdf2_coeffs(double ratio);

// V-cycle-count driven time step control. Not converged within v_fail
// cycles: halve and retake. Converged within v_min: grow 10%. Converged but
// needing more than v_max: halve for the next step.
struct StepController {
  int v_min = 3;
  int v_max = 10;
  int v_fail = 20;
  double d_max = 1e-10;  // defect infinity-norm tolerance
  double growth = 1.1;
  double shrink = 0.5;
  double dt_init = 1e-6;

  void validate() const {
    if (!(v_min < v_max && v_max < v_fail))
      throw config_error("need v_min < v_max < v_fail");
    if (!(d_max > 0.0)) throw config_error("d_max must be positive");
    if (!(dt_init > 0.0)) throw config_error("dt_init must be positive");
  }
};

struct DtDecision {
  double dt;
  bool retake;
};

DtDecision adapt_dt(const StepController& c, int cycles_used, bool converged, double dt);

// Scalar time-stepping state. The per-cell history arrays live in the mesh
// blocks (Planes old/old2/star); this struct carries the step metadata. The
// first step runs backward Euler (r2 = 1, r3 = 0) since no n-1 level exists.
struct TimeHistory {
  double dt_next;          // dt^{n+1}, the step about to be attempted
  double dt_prev = 0.0;    // dt^n, last accepted step
  double ratio = 1.0;      // dt_next / dt_prev
  Bdf2Coeffs coeffs{1.0, 1.0, 0.0};
  bool have_two_levels = false;
  long step = 0;
  double time = 0.0;

  explicit TimeHistory(double dt0 = 1e-6) : dt_next(dt0) {}

  double dt_eff() const { return coeffs.r1 * dt_next; }

  // Change the pending step size (controller retake path); history arrays
  // are untouched, only the coefficients move.
  void set_dt_next(double dt);
};

// Seed phi/U/theta (Plane::old) from the initial conditions: a tanh sphere
// of radius r0 around the domain corner, U = 0, theta = -Delta + Delta
// (phi+1)/2. Also mirrors into old2 and cur so every plane starts defined.
void initialize(OctreeMesh& mesh, const ModelParams& params);

// star = r2 old - r3 old2 on every block (interiors and guards; guard
// layers of old/old2 must be current if star guards are to be used).
void rebuild_star(OctreeMesh& mesh, const Bdf2Coeffs& coeffs);

// Accept the step held in Plane::cur: shift cur -> old -> old2, advance
// time/step counters, set up coefficients for the next step of size dt_next
// and rebuild the star arrays.
void advance_history(OctreeMesh& mesh, TimeHistory& h, double dt_next);

}  // namespace pfs

#endif
