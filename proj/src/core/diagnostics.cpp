#include "core/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/model.hpp"
#include "core/stencil.hpp"

namespace pfs {

std::optional<TipEstimate> tip_radius(const OctreeMesh& mesh, Plane p) {
  // Scan leaf blocks touching the y = 0 and z = 0 faces; the near-axis rows
  // live at local (j,k) = (1,1) and (2,2).
  int best_block = -1;
  int best_cell = 0;
  double best_x = -1.0;
  for (int id = 0; id < int(mesh.slot_count()); ++id) {
    const Block& b = mesh.block(id);
    if (!b.alive() || !b.is_leaf() || b.cj != 0 || b.ck != 0) continue;
    const double* phi = mesh.plane(id, Var::phi, p);
    for (int i = 1; i <= mesh.n_cells(); ++i) {
      const double a = phi[mesh.cell_index(i, 1, 1)];
      const double c = phi[mesh.cell_index(i + 1, 1, 1)];
      if (a > 0.0 && c <= 0.0) {
        const double x = mesh.cell_center(b, i, 1, 1)[0];
        if (x > best_x) {
          best_x = x;
          best_block = id;
          best_cell = i;
        }
      }
    }
  }
  if (best_block < 0) return std::nullopt;

  const Block& b = mesh.block(best_block);
  const double dx = mesh.level_dx(b.level);
  const double* phi = mesh.plane(best_block, Var::phi, p);
  const int i = best_cell;
  const double phi_c = phi[mesh.cell_index(i, 1, 1)];
  const double phi_m = phi[mesh.cell_index(i - 1, 1, 1)];
  const double phi_p = phi[mesh.cell_index(i + 1, 1, 1)];
  const double phi_d = phi[mesh.cell_index(i, 2, 2)];  // the (3dx/2, 3dx/2) row

  TipEstimate est;
  est.x_tip = best_x + dx * phi_c / (phi_c - phi_p);

  const double phi_x = (phi_p - phi_m) / (2.0 * dx);
  const double num = -phi_c + phi_d;
  if (std::abs(num) <= 1e-12 || phi_x == 0.0) return est;  // flat interface
  const double phi_uu = num / (2.0 * dx * dx);
  // phi_x / phi_uu is the curvature radius of the level set through the
  // sample cell; the second term shifts it to the phi = 0 crossing, which
  // lies a distance -phi / phi_x outward (phi_x < 0 at the tip).
  const double r = phi_x / phi_uu - phi_c / phi_x;
  if (!std::isfinite(r) || r <= 0.0) return est;
  est.radius = r;
  est.radius_defined = true;
  return est;
}

double tip_velocity(const std::vector<TipSample>& samples, std::size_t last, int window) {
  if (samples.empty() || last >= samples.size()) return 0.0;
  const std::size_t count = std::min<std::size_t>(last + 1, std::size_t(window));
  if (count < 2) return 0.0;
  const std::size_t first = last + 1 - count;
  double st = 0.0, sx = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    st += samples[k].t;
    sx += samples[k].x_tip;
  }
  const double mt = st / double(count), mx = sx / double(count);
  double num = 0.0, den = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    const double dt = samples[k].t - mt;
    num += dt * (samples[k].x_tip - mx);
    den += dt * dt;
  }
  return den > 0.0 ? num / den : 0.0;
}

void TipSeries::append(TipSample sample) {
  samples_.push_back(sample);
  samples_.back().velocity = tip_velocity(samples_, samples_.size() - 1, window_);
}

double total_solute(const OctreeMesh& mesh, const ModelParams& params, Plane p) {
  double total = 0.0;
  for (int id : mesh.morton_order()) {
    const Block& b = mesh.block(id);
    if (!b.is_leaf()) continue;
    const double dx = mesh.level_dx(b.level);
    const double cell_vol = dx * dx * dx;
    const double* phi = mesh.plane(id, Var::phi, p);
    const double* u = mesh.plane(id, Var::u, p);
    double block_sum = 0.0;
    for (int k = 1; k <= mesh.n_cells(); ++k)
      for (int j = 1; j <= mesh.n_cells(); ++j)
        for (int i = 1; i <= mesh.n_cells(); ++i) {
          const int c = mesh.cell_index(i, j, k);
          block_sum += c_from_u(u[c], phi[c], params);
        }
    total += block_sum * cell_vol;
  }
  return total;
}

double free_energy(const OctreeMesh& mesh, const ModelParams& params, Plane p) {
  double total = 0.0;
  const int s = mesh.side();
  for (int id : mesh.morton_order()) {
    const Block& b = mesh.block(id);
    if (!b.is_leaf()) continue;
    const double dx = mesh.level_dx(b.level);
    const double cell_vol = dx * dx * dx;
    const double* phi = mesh.plane(id, Var::phi, p);
    const double* u = mesh.plane(id, Var::u, p);
    const double* th = mesh.plane(id, Var::theta, p);
    double block_sum = 0.0;
    for (int k = 1; k <= mesh.n_cells(); ++k)
      for (int j = 1; j <= mesh.n_cells(); ++j)
        for (int i = 1; i <= mesh.n_cells(); ++i) {
          const int c = mesh.cell_index(i, j, k);
          const StencilPatch patch{phi + c, 1, s, s * s, dx};
          const GradientData gd = anisotropy(gradient_centered(patch), params);
          const double grad_term = 0.5 * gd.a_val * gd.a_val * gd.q;
          const double f2 = phi[c] * phi[c];
          const double bulk =
              0.5 * f2 * (0.5 * f2 - 1.0) +
              params.lambda * (th[c] + params.mc_inf * u[c]) *
                  (phi[c] - 2.0 * phi[c] * f2 / 3.0 + f2 * f2 * phi[c] / 5.0);
          block_sum += grad_term + bulk;
        }
    total += block_sum * cell_vol;
  }
  return total;
}

std::pair<double, double> field_range(const OctreeMesh& mesh, Var v, Plane p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int id = 0; id < int(mesh.slot_count()); ++id) {
    const Block& b = mesh.block(id);
    if (!b.alive() || !b.is_leaf()) continue;
    const double* f = mesh.plane(id, v, p);
    for (int k = 1; k <= mesh.n_cells(); ++k)
      for (int j = 1; j <= mesh.n_cells(); ++j)
        for (int i = 1; i <= mesh.n_cells(); ++i) {
          const double val = f[mesh.cell_index(i, j, k)];
          lo = std::min(lo, val);
          hi = std::max(hi, val);
        }
  }
  return {lo, hi};
}

CharScales characteristic_scales(const ModelParams& params, std::optional<double> d0_dim,
                                 std::optional<double> dc_dim) {
  CharScales out;
  out.d0 = 5.0 * std::sqrt(2.0) / (8.0 * params.lambda);
  if (d0_dim && dc_dim && *dc_dim > 0.0)
    out.t0 = 0.80 * (*d0_dim) * (*d0_dim) * params.lambda * params.lambda * params.lambda /
             *dc_dim;
  return out;
}

}  // namespace pfs
