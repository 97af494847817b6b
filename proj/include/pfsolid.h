/* pfsolid: implicit adaptive-mesh multigrid solver for coupled
 * thermal-solute phase-field solidification of a binary alloy.
 *
 * C API of the shared library. All functions return pfs_status; on any
 * failure pfs_last_error() gives a human-readable message for the calling
 * thread. Simulations are opaque handles, never shared across threads.
 */
#ifndef PFSOLID_H
#define PFSOLID_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pfs_sim pfs_sim;

typedef enum pfs_status {
  PFS_OK = 0,
  PFS_ERR_CONFIG = 1,  /* bad configuration, arguments or input files */
  PFS_ERR_NUMERIC = 2, /* non-finite values or model breakdown */
  PFS_ERR_NOCONV = 3,  /* nonlinear solve not rescued by dt reduction */
  PFS_ERR_IO = 4       /* file read/write failure */
} pfs_status;

/* Message for the most recent failure on this thread ("" if none). */
const char* pfs_last_error(void);

int pfs_abi_version(void);

/* --- lifecycle ------------------------------------------------------- */

/* workers = 0 means the config value (or PFSOLID_WORKERS, or 1). */
pfs_status pfs_sim_create(const char* config_path, int workers, pfs_sim** out);
pfs_status pfs_sim_create_from_string(const char* config_text, int workers,
                                      pfs_sim** out);
/* max_depth = 0 keeps the checkpoint depth; a larger value permits deeper
 * refinement from the next adaptation pass (restart-at-finer-mesh). Smaller
 * values are rejected. */
pfs_status pfs_sim_restart(const char* checkpoint_path, int max_depth, int workers,
                           pfs_sim** out);
void pfs_sim_destroy(pfs_sim* sim);

pfs_status pfs_sim_set_out_dir(pfs_sim* sim, const char* dir);

/* --- stepping -------------------------------------------------------- */

/* One accepted implicit time step (internal retakes included). */
pfs_status pfs_sim_step(pfs_sim* sim);
/* Step until time >= until_time or max_steps accepted steps (max_steps < 0
 * means unlimited); writes cadenced outputs into the out dir. */
pfs_status pfs_sim_advance(pfs_sim* sim, double until_time, long max_steps);

/* --- state ----------------------------------------------------------- */

double pfs_sim_time(const pfs_sim* sim);
long pfs_sim_step_index(const pfs_sim* sim);
double pfs_sim_dt(const pfs_sim* sim);
unsigned long long pfs_sim_dof(const pfs_sim* sim);
int pfs_sim_workers(const pfs_sim* sim);

typedef struct pfs_tip_sample {
  double t;
  double x_tip;
  double radius;
  double velocity;
  unsigned long long dof;
  int cycles;
  double wall_ms;
  int radius_defined;
} pfs_tip_sample;

/* Latest diagnostics row; PFS_ERR_CONFIG when none exists yet. */
pfs_status pfs_sim_last_tip(const pfs_sim* sim, pfs_tip_sample* out);
pfs_status pfs_sim_phi_range(const pfs_sim* sim, double* min_out, double* max_out);
pfs_status pfs_sim_total_solute(const pfs_sim* sim, double* out);

/* --- outputs --------------------------------------------------------- */

pfs_status pfs_sim_write_checkpoint(pfs_sim* sim, const char* path);
pfs_status pfs_sim_export_fields(pfs_sim* sim, const char* path);
pfs_status pfs_sim_write_series(pfs_sim* sim, const char* path);

/* --- tools ----------------------------------------------------------- */

/* Time-per-step vs degrees of freedom over refinement stages of a snapshot.
 * The input may be a checkpoint or a run config; a config is first advanced
 * to until_time to produce the snapshot. stages: comma-separated "depth" or
 * "depth@eta" tokens, e.g. "4@0.2,5@0.1". out_csv may be NULL. slope_out
 * (may be NULL) receives the fitted log-log slope, or NaN when fewer than
 * two stages were run. */
pfs_status pfs_bench(const char* snapshot_or_config, const char* stages,
                     int steps_per_stage, double until_time, int workers,
                     const char* out_csv, double* slope_out);

/* Built-in oracle suites: "gij", "morton", "tip", "bdf2", or NULL/"" for
 * all. Prints one line per check to stdout; failures_out (may be NULL)
 * receives the failure count. Returns PFS_OK even when checks fail. */
pfs_status pfs_verify(const char* suite, int* failures_out);

#ifdef __cplusplus
}
#endif

#endif /* PFSOLID_H */
