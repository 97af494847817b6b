#ifndef PFS_CORE_SIMULATION_HPP
#define PFS_CORE_SIMULATION_HPP

#include <memory>
#include <string>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/diagnostics.hpp"
#include "core/field_export.hpp"
#include "core/mesh.hpp"
#include "core/solver.hpp"
#include "core/timestep.hpp"
#include "core/worker_pool.hpp"

namespace pfs {

// A full run: mesh + fields + time stepping + adaptivity + diagnostics.
//
// Per accepted step: (re)adapt the mesh on the remesh cadence, rebuild the
// BDF2 star arrays, solve the implicit system by FAS V-cycles with the
// V-cycle-count dt controller (halving and retaking on failure), accept,
// then sample tip diagnostics. Outputs are written on the configured
// cadences and on demand.
class Simulation {
 public:
  explicit Simulation(const RunConfig& cfg, int workers_override = 0);
  explicit Simulation(LoadedCheckpoint&& ck, int workers_override = 0);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  struct StepStats {
    int cycles = 0;
    int retakes = 0;
    double defect = 0.0;
    double dt_used = 0.0;
    double wall_ms = 0.0;
  };

  // One accepted time step (any retakes happen inside).
  StepStats step();

  // Step until time >= until_time or max_steps accepted steps (whichever
  // first; max_steps < 0 means unlimited). Handles cadenced outputs.
  void advance(double until_time, long max_steps);

  double time() const { return history_.time; }
  long step_index() const { return history_.step; }
  double dt_next() const { return history_.dt_next; }
  std::uint64_t dof() const { return mesh_->leaf_cell_count() * kNumVars; }
  int workers() const { return pool_.size(); }

  OctreeMesh& mesh() { return *mesh_; }
  const RunConfig& config() const { return cfg_; }
  void set_out_dir(const std::string& dir) { cfg_.out_dir = dir; }
  const ModelParams& params() const { return cfg_.model; }
  TipSeries& series() { return series_; }
  const TipSeries& series() const { return series_; }
  NonlinearSystem& system() { return *system_; }
  const StepStats& last_stats() const { return last_stats_; }

  void write_checkpoint(const std::string& path) const;
  void export_fields(const std::string& path) const;
  void write_series(const std::string& path) const;

  // Accepted-state convenience queries (Plane::old).
  std::pair<double, double> phi_range() const;
  double solute_total() const;

 private:
  void initial_adapt();
  bool remesh();
  void prepare_attempt();
  void sample_diagnostics(const StepStats& stats);

  RunConfig cfg_;
  WorkerPool pool_;
  std::unique_ptr<OctreeMesh> mesh_;
  std::unique_ptr<NonlinearSystem> system_;
  TimeHistory history_;
  TipSeries series_;
  StepStats last_stats_;
};

}  // namespace pfs

#endif
