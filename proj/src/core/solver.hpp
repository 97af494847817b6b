#ifndef PFS_CORE_SOLVER_HPP
#define PFS_CORE_SOLVER_HPP

#include <atomic>
#include <functional>
#include <limits>

#include "core/mesh.hpp"
#include "core/params.hpp"
#include "core/stencil.hpp"
#include "core/timestep.hpp"
#include "core/worker_pool.hpp"

namespace pfs {

struct SmootherConfig {
  double omega = 0.9;
  int pre_sweeps = 4;
  int post_sweeps = 4;
  int coarse_sweeps = 4;

  void validate() const {
    if (!(omega > 0.0 && omega <= 1.0)) throw config_error("omega must lie in (0, 1]");
    if (pre_sweeps < 1 || post_sweeps < 1 || coarse_sweeps < 1)
      throw config_error("sweep counts must be >= 1");
  }
};

struct DefectWeights {
  double phi = 1.0, u = 1.0, theta = 1.0;
};

// Pointwise Jacobi diagonals of the defect with respect to the center
// unknowns. The phi entry keeps only the Laplacian's center coupling
// (off-diagonal and bulk terms are dropped); theta and U are exact.
struct JacobianDiag {
  double phi = 1.0, u = 1.0, theta = 1.0;
};

// The implicit BDF2 system A_p(v) = v*_p - v_p + dt_eff F_p(v) = 0 over the
// composite octree grid, with the machinery the FAS/MLAT V-cycle needs:
// level sweeps, defect evaluation, inter-level restriction of iterate and
// defect, and correction prolongation. All block loops run over contiguous
// slices of the Morton-Level ordering, one slice per worker; results are
// independent of the worker count.
class NonlinearSystem {
 public:
  NonlinearSystem(OctreeMesh& mesh, const ModelParams& params, WorkerPool& pool);

  OctreeMesh& mesh() { return mesh_; }
  const ModelParams& params() const { return params_; }

  void set_dt_eff(double dt_eff) { dt_eff_ = dt_eff; }
  double dt_eff() const { return dt_eff_; }
  void set_weights(const DefectWeights& w) { weights_ = w; }

  // Optional per-variable source added to F (manufactured-solution and
  // frozen-problem tests).
  using SourceFn = std::function<double(Var, const Vec3&)>;
  void set_source(SourceFn fn) { source_ = std::move(fn); }

  // Select which variables participate (the others are held frozen).
  // Defaults to all three; scalar test problems switch individual ones off.
  void set_active(bool phi, bool u, bool theta);

  // Rebuild the Morton-Level schedule; call after any mesh change.
  void rebuild_schedule();

  // Zero the FAS right-hand side on every leaf (their equation is A(v)=0).
  void clear_leaf_rhs();

  // cur <- old on every block (the time-step initial guess).
  void seed_initial_guess();

  // One damped Jacobi-Newton sweep over a level: reads pre-sweep values
  // only, commits updates afterwards. Returns the weighted infinity norm of
  // the pre-sweep defect over the level. Guard cells are refreshed here,
  // once per sweep.
  double smooth_level(int level, double omega);

  // scratch <- rhs - A(cur) on every block of the level (guards refreshed).
  void compute_defect(int level);

  // Descent transfer fine -> fine-1: covered parents get cur restricted and
  // rhs = I(defect) + A(restricted cur); every fine-1 block snapshots cur
  // into saved for the later correction.
  void restrict_level(int fine_level);

  // Ascent transfer fine-1 -> fine: corrections cur - saved prolonged
  // (additively) into the children of covered fine-1 blocks.
  void prolong_correct(int fine_level);

  // Weighted infinity norm of the composite defect over all leaf cells.
  // Overwrites covered blocks' cur with leaf restrictions (safe between
  // V-cycles, which rebuild them on descent).
  double leaf_defect_norm();

  // Residual and Jacobian diagonal at one cell; exposed for tests.
  void eval_cell(int block_id, int i, int j, int k, std::array<double, 3>& residual,
                 JacobianDiag* diag) const;

  // Hoisted per-block pointers for the hot cell loops.
  struct CellCtx {
    const double* cur[3];
    const double* star[3];
    double dx = 1.0;
    int side = 0;
    int block_id = -1;
  };
  CellCtx make_ctx(int block_id) const;
  void cell_kernel(const CellCtx& ctx, int c, std::array<double, 3>& residual,
                   JacobianDiag* diag) const;

  bool diag_failure() const { return diag_failure_; }
  void reset_diag_failure() { diag_failure_ = false; }

 private:
  struct LevelSchedule {
    std::vector<int> blocks;          // Morton order within the level
    std::vector<int> covered;         // non-leaf blocks, Morton order
    std::vector<std::pair<std::size_t, std::size_t>> slices;
    std::vector<std::pair<std::size_t, std::size_t>> covered_slices;
  };

  void parallel_blocks(const std::vector<int>& ids,
                       const std::vector<std::pair<std::size_t, std::size_t>>& slices,
                       const std::function<void(int, int)>& fn);
  void fill_level(int level, Plane p);

  OctreeMesh& mesh_;
  const ModelParams& params_;
  WorkerPool& pool_;
  double dt_eff_ = 0.0;
  DefectWeights weights_;
  SourceFn source_;
  bool active_[3] = {true, true, true};
  std::vector<LevelSchedule> schedule_;  // [level]
  std::atomic<bool> diag_failure_{false};
};

// One FAS V-cycle over all levels present in the mesh (MLAT: each level
// sweeps only the blocks that exist there). Pre/post smooth M times per
// level, coarse_sweeps at the bottom level.
void vcycle(NonlinearSystem& sys, const SmootherConfig& cfg);

struct SolveResult {
  int cycles = 0;
  bool converged = false;
  double defect = std::numeric_limits<double>::infinity();
};

// V-cycle until the composite defect drops below ctrl.d_max, the cycle
// budget v_fail runs out, the defect grows by more than 10x in one cycle,
// or a Jacobian diagonal degenerates (the last two report not-converged so
// the controller can shrink dt and retake).
SolveResult solve_step(NonlinearSystem& sys, const SmootherConfig& cfg,
                       const StepController& ctrl);

}  // namespace pfs

#endif
