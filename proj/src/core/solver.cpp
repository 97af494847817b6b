// Nonlinear pointwise Jacobi smoother and the FAS/MLAT V-cycle over the
// adaptive octree.

#include "core/solver.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace pfs {

namespace {
constexpr double kLapCenterMag = 128.0 / 30.0;  // |center weight| of the 27-pt Laplacian
}

NonlinearSystem::NonlinearSystem(OctreeMesh& mesh, const ModelParams& params,
                                 WorkerPool& pool)
    : mesh_(mesh), params_(params), pool_(pool) {
  rebuild_schedule();
}

void NonlinearSystem::set_active(bool phi, bool u, bool theta) {
  active_[0] = phi;
  active_[1] = u;
  active_[2] = theta;
}

void NonlinearSystem::rebuild_schedule() {
  const int levels = mesh_.num_levels();
  schedule_.assign(std::size_t(levels) + 1, {});
  const std::vector<int> order = mesh_.morton_level_order();
  for (int id : order) {
    LevelSchedule& s = schedule_[mesh_.block(id).level];
    s.blocks.push_back(id);
    if (!mesh_.block(id).is_leaf()) s.covered.push_back(id);
  }
  for (int l = 1; l <= levels; ++l) {
    schedule_[l].slices = partition_slices(schedule_[l].blocks.size(), pool_.size());
    schedule_[l].covered_slices =
        partition_slices(schedule_[l].covered.size(), pool_.size());
  }
}

void NonlinearSystem::parallel_blocks(
    const std::vector<int>& ids,
    const std::vector<std::pair<std::size_t, std::size_t>>& slices,
    const std::function<void(int, int)>& fn) {
  pool_.run([&](int w) {
    const auto [begin, end] = slices[w];
    for (std::size_t i = begin; i < end; ++i) fn(ids[i], w);
  });
}

void NonlinearSystem::fill_level(int level, Plane p) {
  const LevelSchedule& s = schedule_[level];
  parallel_blocks(s.blocks, s.slices, [&](int id, int) {
    for (Var v : {Var::phi, Var::u, Var::theta}) mesh_.fill_block_guards(id, v, p);
  });
}

void NonlinearSystem::clear_leaf_rhs() {
  for (int id = 0; id < int(mesh_.slot_count()); ++id) {
    if (!mesh_.block(id).alive() || !mesh_.block(id).is_leaf()) continue;
    for (Var v : {Var::phi, Var::u, Var::theta})
      std::memset(mesh_.plane(id, v, Plane::rhs), 0, mesh_.plane_size() * sizeof(double));
  }
}

void NonlinearSystem::seed_initial_guess() {
  for (int id = 0; id < int(mesh_.slot_count()); ++id) {
    if (!mesh_.block(id).alive()) continue;
    for (Var v : {Var::phi, Var::u, Var::theta})
      std::memcpy(mesh_.plane(id, v, Plane::cur), mesh_.plane(id, v, Plane::old),
                  mesh_.plane_size() * sizeof(double));
  }
}

// Residual A_p(v) = v*_p - v_p + dt_eff F_p(v) (plus optional source inside
// F) and the Jacobi diagonals of the defect d = f - A. The pointer context
// is hoisted per block; every evaluation path (sweeps, defect, FAS rhs,
// tests) runs through the same kernel, so all paths are bitwise identical.
void NonlinearSystem::cell_kernel(const CellCtx& ctx, int c,
                                  std::array<double, 3>& residual,
                                  JacobianDiag* diag) const {
  const double phi_c = ctx.cur[0][c], u_c = ctx.cur[1][c], th_c = ctx.cur[2][c];

  if (diag) *diag = {1.0, 1.0, 1.0};
  residual = {0.0, 0.0, 0.0};

  if (dt_eff_ == 0.0) {  // pure identity system
    if (active_[0]) residual[0] = ctx.star[0][c] - phi_c;
    if (active_[1]) residual[1] = ctx.star[1][c] - u_c;
    if (active_[2]) residual[2] = ctx.star[2][c] - th_c;
    return;
  }

  const int s = ctx.side;
  const double dx = ctx.dx;
  const StencilPatch phi_patch{ctx.cur[0] + c, 1, s, s * s, dx};
  const StencilPatch u_patch{ctx.cur[1] + c, 1, s, s * s, dx};
  const StencilPatch th_patch{ctx.cur[2] + c, 1, s, s * s, dx};
  const StencilPatch star_patch{ctx.star[0] + c, 1, s, s * s, dx};

  double F[3] = {0.0, 0.0, 0.0};
  const bool need_pd = active_[0] || active_[1];
  PhiPatchData pd;
  if (need_pd) pd = analyze_phi_patch(phi_patch, params_);

  if (active_[0]) {
    const double tau = relaxation_time(u_c, params_);
    F[0] = rhs_phi(pd, phi_c, u_c, th_c, params_);
    if (diag) {
      const double center_coeff = pd.reduced ? pd.a2 : pd.g.trace() / 3.0;
      diag->phi =
          1.0 + dt_eff_ * center_coeff * kLapCenterMag / (dx * dx) / (tau * pd.a2);
    }
  }
  if (active_[1]) {
    double df_du = 0.0;
    F[1] = rhs_u_with_diag(pd, u_patch, phi_patch, star_patch, dt_eff_, params_,
                           diag ? &df_du : nullptr);
    if (diag) diag->u = 1.0 - dt_eff_ * df_du;
  }
  if (active_[2]) {
    const double phi_dot = (phi_c - ctx.star[0][c]) / dt_eff_;
    F[2] = rhs_theta(th_patch, phi_dot, params_);
    if (diag)
      diag->theta = 1.0 + dt_eff_ * params_.d_theta() * kLapCenterMag / (dx * dx);
  }
  if (source_) {
    const int s2 = s * s;
    const int k = c / s2, j = (c - k * s2) / s, i = c - k * s2 - j * s;
    const Vec3 x = mesh_.cell_center(mesh_.block(ctx.block_id), i, j, k);
    if (active_[0]) F[0] += source_(Var::phi, x);
    if (active_[1]) F[1] += source_(Var::u, x);
    if (active_[2]) F[2] += source_(Var::theta, x);
  }
  if (active_[0]) residual[0] = ctx.star[0][c] - phi_c + dt_eff_ * F[0];
  if (active_[1]) residual[1] = ctx.star[1][c] - u_c + dt_eff_ * F[1];
  if (active_[2]) residual[2] = ctx.star[2][c] - th_c + dt_eff_ * F[2];
}

NonlinearSystem::CellCtx NonlinearSystem::make_ctx(int block_id) const {
  CellCtx ctx;
  for (int v = 0; v < 3; ++v) {
    ctx.cur[v] = mesh_.plane(block_id, static_cast<Var>(v), Plane::cur);
    ctx.star[v] = mesh_.plane(block_id, static_cast<Var>(v), Plane::star);
  }
  ctx.dx = mesh_.level_dx(mesh_.block(block_id).level);
  ctx.side = mesh_.side();
  ctx.block_id = block_id;
  return ctx;
}

void NonlinearSystem::eval_cell(int block_id, int i, int j, int k,
                                std::array<double, 3>& residual,
                                JacobianDiag* diag) const {
  cell_kernel(make_ctx(block_id), mesh_.cell_index(i, j, k), residual, diag);
}


double NonlinearSystem::smooth_level(int level, double omega) {
  fill_level(level, Plane::cur);
  const LevelSchedule& sched = schedule_[level];
  const int n = mesh_.n_cells();
  std::vector<double> worker_max(std::size_t(pool_.size()), 0.0);

  parallel_blocks(sched.blocks, sched.slices, [&](int id, int w) {
    double* scr[3] = {mesh_.plane(id, Var::phi, Plane::scratch),
                      mesh_.plane(id, Var::u, Plane::scratch),
                      mesh_.plane(id, Var::theta, Plane::scratch)};
    const double* cur[3] = {mesh_.plane(id, Var::phi, Plane::cur),
                            mesh_.plane(id, Var::u, Plane::cur),
                            mesh_.plane(id, Var::theta, Plane::cur)};
    const double* rhs[3] = {mesh_.plane(id, Var::phi, Plane::rhs),
                            mesh_.plane(id, Var::u, Plane::rhs),
                            mesh_.plane(id, Var::theta, Plane::rhs)};
    const double wvar[3] = {weights_.phi, weights_.u, weights_.theta};
    double local_max = worker_max[w];
    const CellCtx ctx = make_ctx(id);
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) {
          std::array<double, 3> res;
          JacobianDiag diag;
          const int c = mesh_.cell_index(i, j, k);
          cell_kernel(ctx, c, res, &diag);
          const double jd[3] = {diag.phi, diag.u, diag.theta};
          for (int v = 0; v < 3; ++v) {
            if (!active_[v]) continue;
            const double d = rhs[v][c] - res[v];
            const double J = jd[v];
            if (!(J > 0.0)) {
              diag_failure_ = true;
              continue;
            }
            const double upd = cur[v][c] - omega * d / J;
            if (!std::isfinite(upd))
              throw numeric_error(
                  "non-finite update at block (" + std::to_string(mesh_.block(id).level) +
                  "," + std::to_string(mesh_.block(id).ci) + "," +
                  std::to_string(mesh_.block(id).cj) + "," +
                  std::to_string(mesh_.block(id).ck) + ") cell (" + std::to_string(i) +
                  "," + std::to_string(j) + "," + std::to_string(k) + ") var " +
                  std::to_string(v));
            scr[v][c] = upd;
            local_max = std::max(local_max, wvar[v] * std::abs(d));
          }
        }
    worker_max[w] = local_max;
  });

  // Commit: Jacobi semantics, every read above used pre-sweep values.
  parallel_blocks(sched.blocks, sched.slices, [&](int id, int) {
    for (int v = 0; v < 3; ++v) {
      if (!active_[v]) continue;
      const double* src = mesh_.plane(id, static_cast<Var>(v), Plane::scratch);
      double* dst = mesh_.plane(id, static_cast<Var>(v), Plane::cur);
      for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j) {
          const int row = mesh_.cell_index(1, j, k);
          std::memcpy(dst + row, src + row, std::size_t(n) * sizeof(double));
        }
    }
  });

  double norm = 0.0;
  for (double m : worker_max) norm = std::max(norm, m);
  return norm;
}

void NonlinearSystem::compute_defect(int level) {
  fill_level(level, Plane::cur);
  const LevelSchedule& sched = schedule_[level];
  const int n = mesh_.n_cells();
  parallel_blocks(sched.blocks, sched.slices, [&](int id, int) {
    double* scr[3] = {mesh_.plane(id, Var::phi, Plane::scratch),
                      mesh_.plane(id, Var::u, Plane::scratch),
                      mesh_.plane(id, Var::theta, Plane::scratch)};
    const double* rhs[3] = {mesh_.plane(id, Var::phi, Plane::rhs),
                            mesh_.plane(id, Var::u, Plane::rhs),
                            mesh_.plane(id, Var::theta, Plane::rhs)};
    const CellCtx ctx = make_ctx(id);
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) {
          std::array<double, 3> res;
          const int c = mesh_.cell_index(i, j, k);
          cell_kernel(ctx, c, res, nullptr);
          for (int v = 0; v < 3; ++v) scr[v][c] = rhs[v][c] - res[v];
        }
  });
}

void NonlinearSystem::restrict_level(int fine_level) {
  const int coarse = fine_level - 1;
  const LevelSchedule& cs = schedule_[coarse];

  // Covered coarse blocks take the restriction of the fine iterate.
  parallel_blocks(cs.covered, cs.covered_slices, [&](int id, int) {
    for (Var v : {Var::phi, Var::u, Var::theta})
      for (int oct = 0; oct < 8; ++oct)
        mesh_.restrict_child_into_parent(id, oct, v, Plane::cur, Plane::cur);
  });
  // Every coarse block snapshots the iterate the correction is formed from.
  parallel_blocks(cs.blocks, cs.slices, [&](int id, int) {
    for (Var v : {Var::phi, Var::u, Var::theta})
      std::memcpy(mesh_.plane(id, v, Plane::saved), mesh_.plane(id, v, Plane::cur),
                  mesh_.plane_size() * sizeof(double));
  });
  fill_level(coarse, Plane::cur);
  // FAS right-hand side on covered blocks: restricted fine defect plus the
  // coarse residual of the restricted iterate. Leaf right-hand sides stay 0.
  const int n = mesh_.n_cells();
  parallel_blocks(cs.covered, cs.covered_slices, [&](int id, int) {
    for (Var v : {Var::phi, Var::u, Var::theta})
      for (int oct = 0; oct < 8; ++oct)
        mesh_.restrict_child_into_parent(id, oct, v, Plane::scratch, Plane::rhs);
    double* rhs[3] = {mesh_.plane(id, Var::phi, Plane::rhs),
                      mesh_.plane(id, Var::u, Plane::rhs),
                      mesh_.plane(id, Var::theta, Plane::rhs)};
    const CellCtx ctx = make_ctx(id);
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) {
          std::array<double, 3> res;
          const int c = mesh_.cell_index(i, j, k);
          cell_kernel(ctx, c, res, nullptr);
          for (int v = 0; v < 3; ++v) rhs[v][c] += res[v];
        }
  });
}

void NonlinearSystem::prolong_correct(int fine_level) {
  const int coarse = fine_level - 1;
  const LevelSchedule& cs = schedule_[coarse];
  const std::size_t np = mesh_.plane_size();
  parallel_blocks(cs.blocks, cs.slices, [&](int id, int) {
    for (Var v : {Var::phi, Var::u, Var::theta}) {
      const double* cur = mesh_.plane(id, v, Plane::cur);
      const double* saved = mesh_.plane(id, v, Plane::saved);
      double* scr = mesh_.plane(id, v, Plane::scratch);
      for (std::size_t c = 0; c < np; ++c) scr[c] = cur[c] - saved[c];
    }
  });
  fill_level(coarse, Plane::scratch);
  parallel_blocks(cs.covered, cs.covered_slices, [&](int id, int) {
    for (Var v : {Var::phi, Var::u, Var::theta})
      for (int oct = 0; oct < 8; ++oct)
        mesh_.prolong_parent_into_child(id, oct, v, Plane::scratch, Plane::cur,
                                        /*additive=*/true);
  });
}

double NonlinearSystem::leaf_defect_norm() {
  for (Var v : {Var::phi, Var::u, Var::theta}) mesh_.sync_covered(v, Plane::cur);
  const int levels = mesh_.num_levels();
  const int n = mesh_.n_cells();
  std::vector<double> worker_max(std::size_t(pool_.size()), 0.0);
  for (int level = 1; level <= levels; ++level) {
    fill_level(level, Plane::cur);
    const LevelSchedule& sched = schedule_[level];
    parallel_blocks(sched.blocks, sched.slices, [&](int id, int w) {
      if (!mesh_.block(id).is_leaf()) return;
      const double wvar[3] = {weights_.phi, weights_.u, weights_.theta};
      double local_max = worker_max[w];
      const CellCtx ctx = make_ctx(id);
      for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j)
          for (int i = 1; i <= n; ++i) {
            std::array<double, 3> res;
            cell_kernel(ctx, mesh_.cell_index(i, j, k), res, nullptr);
            for (int v = 0; v < 3; ++v)
              if (active_[v]) local_max = std::max(local_max, wvar[v] * std::abs(res[v]));
          }
      worker_max[w] = local_max;
    });
  }
  double norm = 0.0;
  for (double m : worker_max) norm = std::max(norm, m);
  return norm;
}

namespace {

void vcycle_descend(NonlinearSystem& sys, const SmootherConfig& cfg, int level) {
  for (int m = 0; m < cfg.pre_sweeps; ++m) sys.smooth_level(level, cfg.omega);
  sys.compute_defect(level);
  sys.restrict_level(level);
  if (level - 1 == 1) {
    for (int m = 0; m < cfg.coarse_sweeps; ++m) sys.smooth_level(1, cfg.omega);
  } else {
    vcycle_descend(sys, cfg, level - 1);
  }
  sys.prolong_correct(level);
  for (int m = 0; m < cfg.post_sweeps; ++m) sys.smooth_level(level, cfg.omega);
}

}  // namespace

void vcycle(NonlinearSystem& sys, const SmootherConfig& cfg) {
  const int finest = sys.mesh().num_levels();
  if (finest == 1) {
    for (int m = 0; m < cfg.pre_sweeps + cfg.post_sweeps; ++m)
      sys.smooth_level(1, cfg.omega);
    return;
  }
  vcycle_descend(sys, cfg, finest);
}

SolveResult solve_step(NonlinearSystem& sys, const SmootherConfig& cfg,
                       const StepController& ctrl) {
  sys.reset_diag_failure();
  sys.seed_initial_guess();
  sys.clear_leaf_rhs();

  SolveResult result;
  double prev = sys.leaf_defect_norm();
  if (prev < ctrl.d_max) {
    result.converged = true;
    result.defect = prev;
    return result;
  }
  for (int c = 1; c <= ctrl.v_fail; ++c) {
    vcycle(sys, cfg);
    result.cycles = c;
    if (sys.diag_failure()) return result;  // needs a smaller dt
    const double d = sys.leaf_defect_norm();
    result.defect = d;
    if (d < ctrl.d_max) {
      result.converged = true;
      return result;
    }
    if (d > 10.0 * prev) return result;  // defect blow-up, retake
    prev = d;
  }
  return result;
}

}  // namespace pfs
