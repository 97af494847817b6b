// pfsolid command line: run, restart, bench and verify over the shared
// library's C API.

#include <cmath>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "pfsolid.h"

namespace {

int status_to_exit(pfs_status s) {
  switch (s) {
    case PFS_OK:
      return 0;
    case PFS_ERR_CONFIG:
    case PFS_ERR_IO:
      return 1;
    case PFS_ERR_NUMERIC:
      return 2;
    case PFS_ERR_NOCONV:
      return 3;
  }
  return 2;
}

int fail(pfs_status s) {
  std::fprintf(stderr, "pfsolid: %s\n", pfs_last_error());
  return status_to_exit(s);
}

void print_progress(pfs_sim* sim) {
  pfs_tip_sample tip;
  if (pfs_sim_last_tip(sim, &tip) == PFS_OK) {
    std::printf("step %ld  t %.6g  dt %.3g  dof %llu  cycles %d  x_tip %.6g  r %s\n",
                pfs_sim_step_index(sim), pfs_sim_time(sim), pfs_sim_dt(sim), tip.dof,
                tip.cycles, tip.x_tip,
                tip.radius_defined ? std::to_string(tip.radius).c_str() : "-");
  } else {
    std::printf("step %ld  t %.6g  dt %.3g  dof %llu\n", pfs_sim_step_index(sim),
                pfs_sim_time(sim), pfs_sim_dt(sim), pfs_sim_dof(sim));
  }
  std::fflush(stdout);
}

int drive(pfs_sim* sim, double until, long steps, const std::string& out_dir,
          long progress_every) {
  if (!out_dir.empty()) {
    if (pfs_status s = pfs_sim_set_out_dir(sim, out_dir.c_str()); s != PFS_OK)
      return fail(s);
  }
  // Step one at a time so progress can be reported; cadenced outputs are
  // handled by the library through pfs_sim_advance.
  long taken = 0;
  while ((steps < 0 || taken < steps) && pfs_sim_time(sim) < until) {
    const long remaining = steps < 0 ? -1 : steps - taken;
    const long chunk =
        remaining < 0 ? progress_every : std::min(progress_every, remaining);
    const long before = pfs_sim_step_index(sim);
    if (pfs_status s = pfs_sim_advance(sim, until, chunk); s != PFS_OK) return fail(s);
    taken += pfs_sim_step_index(sim) - before;
    if (pfs_sim_step_index(sim) == before) break;  // until_time reached
    print_progress(sim);
  }

  const std::string base = out_dir.empty() ? std::string("out") : out_dir;
  double lo = 0, hi = 0;
  pfs_sim_phi_range(sim, &lo, &hi);
  std::printf("final: t %.6g, %ld steps, dof %llu, phi range [%.6g, %.6g]\n",
              pfs_sim_time(sim), pfs_sim_step_index(sim), pfs_sim_dof(sim), lo, hi);
  if (pfs_status s = pfs_sim_export_fields(sim, (base + "/fields_final.pfs").c_str());
      s != PFS_OK)
    return fail(s);
  if (pfs_status s = pfs_sim_write_checkpoint(sim, (base + "/final.pfsckpt").c_str());
      s != PFS_OK)
    return fail(s);
  if (pfs_status s = pfs_sim_write_series(sim, (base + "/series.csv").c_str());
      s != PFS_OK)
    return fail(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive implicit multigrid phase-field solidification solver"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a simulation from a config file");
  std::string run_config;
  double run_until = 1e30;
  long run_steps = -1;
  int run_workers = 0;
  std::string run_out;
  long run_progress = 10;
  run->add_option("config", run_config, "config file (key = value)")->required();
  run->add_option("--until", run_until, "stop once simulation time reaches this");
  run->add_option("--steps", run_steps, "stop after this many accepted steps");
  run->add_option("--workers", run_workers, "worker threads (0 = config/env)");
  run->add_option("--out", run_out, "output directory override");
  run->add_option("--progress-every", run_progress, "progress line cadence in steps");

  // restart
  auto* restart = app.add_subcommand("restart", "continue from a checkpoint");
  std::string restart_ckpt;
  int restart_depth = 0;
  double restart_until = 1e30;
  long restart_steps = -1;
  int restart_workers = 0;
  std::string restart_out;
  long restart_progress = 10;
  restart->add_option("checkpoint", restart_ckpt, "checkpoint file")->required();
  restart->add_option("--max-depth", restart_depth,
                      "allow refinement down to this depth (>= checkpoint depth)");
  restart->add_option("--until", restart_until, "stop once simulation time reaches this");
  restart->add_option("--steps", restart_steps, "stop after this many accepted steps");
  restart->add_option("--workers", restart_workers, "worker threads (0 = config/env)");
  restart->add_option("--out", restart_out, "output directory override");
  restart->add_option("--progress-every", restart_progress,
                      "progress line cadence in steps");

  // bench
  auto* bench = app.add_subcommand("bench", "time-per-step vs DoF over refinement stages");
  std::string bench_ckpt, bench_stages, bench_out;
  int bench_steps = 3;
  int bench_workers = 0;
  double bench_until = 10.0;
  bench->add_option("snapshot", bench_ckpt,
                    "mid-growth checkpoint, or a config to advance first")
      ->required();
  bench->add_option("--stages", bench_stages,
                    "comma-separated depth or depth@eta stage list")
      ->required();
  bench->add_option("--steps", bench_steps, "measured steps per stage");
  bench->add_option("--until", bench_until, "snapshot time when given a config");
  bench->add_option("--workers", bench_workers, "worker threads");
  bench->add_option("--out", bench_out, "CSV output path");

  // verify
  auto* verify = app.add_subcommand("verify", "built-in oracle suites");
  std::string verify_suite;
  verify->add_option("--suite", verify_suite, "gij, morton, tip or bdf2 (default all)");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    pfs_sim* sim = nullptr;
    if (pfs_status s = pfs_sim_create(run_config.c_str(), run_workers, &sim);
        s != PFS_OK)
      return fail(s);
    const int code =
        drive(sim, run_until, run_steps, run_out, std::max(1L, run_progress));
    pfs_sim_destroy(sim);
    return code;
  }
  if (*restart) {
    pfs_sim* sim = nullptr;
    if (pfs_status s =
            pfs_sim_restart(restart_ckpt.c_str(), restart_depth, restart_workers, &sim);
        s != PFS_OK)
      return fail(s);
    const int code = drive(sim, restart_until, restart_steps, restart_out,
                           std::max(1L, restart_progress));
    pfs_sim_destroy(sim);
    return code;
  }
  if (*bench) {
    double slope = 0.0;
    if (pfs_status s = pfs_bench(bench_ckpt.c_str(), bench_stages.c_str(), bench_steps,
                                 bench_until, bench_workers,
                                 bench_out.empty() ? nullptr : bench_out.c_str(), &slope);
        s != PFS_OK)
      return fail(s);
    return 0;
  }
  if (*verify) {
    int failures = 0;
    if (pfs_status s = pfs_verify(verify_suite.empty() ? nullptr : verify_suite.c_str(),
                                  &failures);
        s != PFS_OK)
      return fail(s);
    return failures == 0 ? 0 : 2;
  }
  return 1;
}
