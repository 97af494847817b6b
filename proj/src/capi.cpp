// C API of the shared library: opaque handles around Simulation, exceptions
// mapped to status codes with a per-thread message.

#include "pfsolid.h"

#include <cstring>
#include <iostream>
#include <limits>
#include <string>

#include "core/bench.hpp"
#include "core/simulation.hpp"
#include "core/verify.hpp"

#if defined(__GNUC__)
#define PFS_EXPORT __attribute__((visibility("default")))
#else
#define PFS_EXPORT
#endif

struct pfs_sim {
  pfs::Simulation sim;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
pfs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PFS_OK;
  } catch (const pfs::config_error& e) {
    g_last_error = e.what();
    return PFS_ERR_CONFIG;
  } catch (const pfs::convergence_error& e) {
    g_last_error = e.what();
    return PFS_ERR_NOCONV;
  } catch (const pfs::io_error& e) {
    g_last_error = e.what();
    return PFS_ERR_IO;
  } catch (const pfs::numeric_error& e) {
    g_last_error = e.what();
    return PFS_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PFS_ERR_NUMERIC;
  }
}

pfs_status require(bool ok, const char* msg) {
  if (ok) return PFS_OK;
  g_last_error = msg;
  return PFS_ERR_CONFIG;
}

}  // namespace

extern "C" {

PFS_EXPORT const char* pfs_last_error(void) { return g_last_error.c_str(); }

PFS_EXPORT int pfs_abi_version(void) { return 1; }

PFS_EXPORT pfs_status pfs_sim_create(const char* config_path, int workers,
                                     pfs_sim** out) {
  if (pfs_status s = require(config_path && out, "null argument"); s != PFS_OK) return s;
  *out = nullptr;
  return guarded([&] {
    const pfs::RunConfig cfg = pfs::load_config_file(config_path);
    *out = new pfs_sim{pfs::Simulation(cfg, workers)};
  });
}

PFS_EXPORT pfs_status pfs_sim_create_from_string(const char* config_text, int workers,
                                                 pfs_sim** out) {
  if (pfs_status s = require(config_text && out, "null argument"); s != PFS_OK) return s;
  *out = nullptr;
  return guarded([&] {
    const pfs::RunConfig cfg = pfs::parse_config(config_text);
    *out = new pfs_sim{pfs::Simulation(cfg, workers)};
  });
}

PFS_EXPORT pfs_status pfs_sim_restart(const char* checkpoint_path, int max_depth,
                                      int workers, pfs_sim** out) {
  if (pfs_status s = require(checkpoint_path && out, "null argument"); s != PFS_OK)
    return s;
  *out = nullptr;
  return guarded([&] {
    auto loaded = pfs::read_checkpoint(
        checkpoint_path,
        max_depth > 0 ? std::optional<int>(max_depth) : std::nullopt);
    *out = new pfs_sim{pfs::Simulation(std::move(loaded), workers)};
  });
}

PFS_EXPORT void pfs_sim_destroy(pfs_sim* sim) { delete sim; }

PFS_EXPORT pfs_status pfs_sim_set_out_dir(pfs_sim* sim, const char* dir) {
  if (pfs_status s = require(sim && dir, "null argument"); s != PFS_OK) return s;
  return guarded([&] { sim->sim.set_out_dir(dir); });
}

PFS_EXPORT pfs_status pfs_sim_step(pfs_sim* sim) {
  if (pfs_status s = require(sim != nullptr, "null simulation"); s != PFS_OK) return s;
  return guarded([&] { sim->sim.step(); });
}

PFS_EXPORT pfs_status pfs_sim_advance(pfs_sim* sim, double until_time, long max_steps) {
  if (pfs_status s = require(sim != nullptr, "null simulation"); s != PFS_OK) return s;
  return guarded([&] { sim->sim.advance(until_time, max_steps); });
}

PFS_EXPORT double pfs_sim_time(const pfs_sim* sim) { return sim ? sim->sim.time() : 0.0; }

PFS_EXPORT long pfs_sim_step_index(const pfs_sim* sim) {
  return sim ? sim->sim.step_index() : -1;
}

PFS_EXPORT double pfs_sim_dt(const pfs_sim* sim) { return sim ? sim->sim.dt_next() : 0.0; }

PFS_EXPORT unsigned long long pfs_sim_dof(const pfs_sim* sim) {
  return sim ? sim->sim.dof() : 0;
}

PFS_EXPORT int pfs_sim_workers(const pfs_sim* sim) {
  return sim ? sim->sim.workers() : 0;
}

PFS_EXPORT pfs_status pfs_sim_last_tip(const pfs_sim* sim, pfs_tip_sample* out) {
  if (pfs_status s = require(sim && out, "null argument"); s != PFS_OK) return s;
  const auto& samples = sim->sim.series().samples();
  if (samples.empty()) {
    g_last_error = "no diagnostics samples yet";
    return PFS_ERR_CONFIG;
  }
  const pfs::TipSample& s = samples.back();
  *out = pfs_tip_sample{s.t,   s.x_tip,      s.radius,  s.velocity,
                        s.dof, s.cycles,     s.wall_ms, s.radius_defined ? 1 : 0};
  return PFS_OK;
}

PFS_EXPORT pfs_status pfs_sim_phi_range(const pfs_sim* sim, double* min_out,
                                        double* max_out) {
  if (pfs_status s = require(sim && min_out && max_out, "null argument"); s != PFS_OK)
    return s;
  return guarded([&] {
    const auto [lo, hi] = sim->sim.phi_range();
    *min_out = lo;
    *max_out = hi;
  });
}

PFS_EXPORT pfs_status pfs_sim_total_solute(const pfs_sim* sim, double* out) {
  if (pfs_status s = require(sim && out, "null argument"); s != PFS_OK) return s;
  return guarded([&] { *out = sim->sim.solute_total(); });
}

PFS_EXPORT pfs_status pfs_sim_write_checkpoint(pfs_sim* sim, const char* path) {
  if (pfs_status s = require(sim && path, "null argument"); s != PFS_OK) return s;
  return guarded([&] { sim->sim.write_checkpoint(path); });
}

PFS_EXPORT pfs_status pfs_sim_export_fields(pfs_sim* sim, const char* path) {
  if (pfs_status s = require(sim && path, "null argument"); s != PFS_OK) return s;
  return guarded([&] { sim->sim.export_fields(path); });
}

PFS_EXPORT pfs_status pfs_sim_write_series(pfs_sim* sim, const char* path) {
  if (pfs_status s = require(sim && path, "null argument"); s != PFS_OK) return s;
  return guarded([&] { sim->sim.write_series(path); });
}

PFS_EXPORT pfs_status pfs_bench(const char* snapshot_or_config, const char* stages,
                                int steps_per_stage, double until_time, int workers,
                                const char* out_csv, double* slope_out) {
  if (pfs_status s = require(snapshot_or_config && stages, "null argument"); s != PFS_OK)
    return s;
  return guarded([&] {
    const auto parsed = pfs::parse_bench_stages(stages);
    const pfs::BenchResult result = pfs::bench_scaling(
        snapshot_or_config, parsed, steps_per_stage, workers, until_time);
    if (out_csv) pfs::write_bench_csv(out_csv, result);
    if (slope_out)
      *slope_out = result.slope_defined
                       ? result.slope
                       : std::numeric_limits<double>::quiet_NaN();
    for (const pfs::BenchRow& r : result.rows)
      std::cout << "bench depth " << r.max_depth << ": dof " << r.dof << ", "
                << r.ms_per_step << " ms/step, " << r.cycles_per_step << " cycles/step\n";
    if (result.slope_defined)
      std::cout << "bench slope " << result.slope << "\n";
    else
      std::cout << "bench slope undefined (need >= 2 stages)\n";
  });
}

PFS_EXPORT pfs_status pfs_verify(const char* suite, int* failures_out) {
  return guarded([&] {
    const int failures = pfs::run_verify(suite ? suite : "", std::cout);
    if (failures_out) *failures_out = failures;
  });
}

}  // extern "C"
