#include "core/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace pfs {

namespace {
constexpr std::array<Plane, 2> kHistoryPlanes = {Plane::old, Plane::old2};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}
}  // namespace

Simulation::Simulation(const RunConfig& cfg, int workers_override)
    : cfg_(cfg),
      pool_(workers_override > 0 ? workers_override : cfg.resolved_workers()),
      history_(cfg.controller.dt_init),
      series_(cfg.velocity_window) {
  mesh_ = std::make_unique<OctreeMesh>(cfg_.domain_size, cfg_.base_blocks, cfg_.n_cells,
                                       cfg_.max_depth);
  initialize(*mesh_, cfg_.model);
  initial_adapt();
  system_ = std::make_unique<NonlinearSystem>(*mesh_, cfg_.model, pool_);
  system_->set_weights(cfg_.defect_weights);
}

Simulation::Simulation(LoadedCheckpoint&& ck, int workers_override)
    : cfg_(ck.config),
      pool_(workers_override > 0 ? workers_override : ck.config.resolved_workers()),
      history_(ck.history),
      series_(std::move(ck.series)) {
  mesh_ = std::move(ck.mesh);
  system_ = std::make_unique<NonlinearSystem>(*mesh_, cfg_.model, pool_);
  system_->set_weights(cfg_.defect_weights);
}

void Simulation::initial_adapt() {
  // Refine toward the seed before the first step; the initial condition is
  // analytic, so new cells are re-seeded exactly instead of prolonged.
  for (int pass = 0; pass < cfg_.max_depth; ++pass) {
    for (Var v : {Var::phi, Var::u, Var::theta}) mesh_->fill_guards(v, Plane::old);
    const auto flags =
        mesh_->flag_refinement(cfg_.e_phi, cfg_.e_u, cfg_.e_theta, cfg_.eta, Plane::old);
    if (!mesh_->apply_flags(flags, kHistoryPlanes)) break;
    initialize(*mesh_, cfg_.model);
  }
  mesh_->check_invariants();
}

bool Simulation::remesh() {
  for (Var v : {Var::phi, Var::u, Var::theta}) mesh_->fill_guards(v, Plane::old);
  const auto flags =
      mesh_->flag_refinement(cfg_.e_phi, cfg_.e_u, cfg_.e_theta, cfg_.eta, Plane::old);
  const bool changed = mesh_->apply_flags(flags, kHistoryPlanes);
  if (changed) system_->rebuild_schedule();
  return changed;
}

void Simulation::prepare_attempt() {
  for (Var v : {Var::phi, Var::u, Var::theta}) {
    mesh_->sync_covered(v, Plane::old);
    mesh_->sync_covered(v, Plane::old2);
  }
  rebuild_star(*mesh_, history_.coeffs);
  for (Var v : {Var::phi, Var::u, Var::theta}) mesh_->fill_guards(v, Plane::star);
  system_->set_dt_eff(history_.dt_eff());
}

Simulation::StepStats Simulation::step() {
  const double t0 = now_ms();
  if (cfg_.remesh_interval > 0 && history_.step % cfg_.remesh_interval == 0) remesh();

  StepStats stats;
  for (;;) {
    prepare_attempt();
    const SolveResult res = solve_step(*system_, cfg_.smoother, cfg_.controller);
    const DtDecision dec =
        adapt_dt(cfg_.controller, res.cycles, res.converged, history_.dt_next);
    stats.cycles = res.cycles;
    stats.defect = res.defect;
    if (dec.retake) {
      ++stats.retakes;
      if (dec.dt < 1e-14)
        throw convergence_error("time step collapsed below 1e-14 at t = " +
                                std::to_string(history_.time));
      history_.set_dt_next(dec.dt);
      continue;
    }
    stats.dt_used = history_.dt_next;
    advance_history(*mesh_, history_, dec.dt);
    break;
  }
  stats.wall_ms = now_ms() - t0;
  last_stats_ = stats;
  if (cfg_.series_interval > 0 && history_.step % cfg_.series_interval == 0)
    sample_diagnostics(stats);
  return stats;
}

void Simulation::sample_diagnostics(const StepStats& stats) {
  mesh_->fill_guards(Var::phi, Plane::old);
  const auto tip = tip_radius(*mesh_, Plane::old);
  TipSample sample;
  sample.t = history_.time;
  sample.dof = dof();
  sample.cycles = stats.cycles;
  sample.wall_ms = stats.wall_ms;
  if (tip) {
    sample.x_tip = tip->x_tip;
    sample.radius = tip->radius;
    sample.radius_defined = tip->radius_defined;
  } else {
    sample.x_tip = std::numeric_limits<double>::quiet_NaN();
  }
  series_.append(sample);
}

void Simulation::advance(double until_time, long max_steps) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg_.out_dir);
  long taken = 0;
  while ((max_steps < 0 || taken < max_steps) && history_.time < until_time) {
    step();
    ++taken;
    char name[64];
    if (cfg_.export_interval > 0 && history_.step % cfg_.export_interval == 0) {
      std::snprintf(name, sizeof(name), "fields_%06ld.pfs", history_.step);
      export_fields((fs::path(cfg_.out_dir) / name).string());
    }
    if (cfg_.checkpoint_interval > 0 && history_.step % cfg_.checkpoint_interval == 0) {
      std::snprintf(name, sizeof(name), "ckpt_%06ld.pfsckpt", history_.step);
      write_checkpoint((fs::path(cfg_.out_dir) / name).string());
    }
  }
  write_series((fs::path(cfg_.out_dir) / "series.csv").string());
}

void Simulation::write_checkpoint(const std::string& path) const {
  pfs::write_checkpoint(path, *mesh_, cfg_, history_, series_);
}

void Simulation::export_fields(const std::string& path) const {
  pfs::export_fields(path, *mesh_, cfg_.model, Plane::old, history_.time, history_.step);
}

void Simulation::write_series(const std::string& path) const {
  write_series_csv(path, series_);
}

std::pair<double, double> Simulation::phi_range() const {
  return field_range(*mesh_, Var::phi, Plane::old);
}

double Simulation::solute_total() const {
  return total_solute(*mesh_, cfg_.model, Plane::old);
}

}  // namespace pfs
