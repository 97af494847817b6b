#ifndef PFS_CORE_CONFIG_HPP
#define PFS_CORE_CONFIG_HPP

#include <string>

#include "core/params.hpp"
#include "core/solver.hpp"
#include "core/timestep.hpp"

namespace pfs {

// Full run description. Parsed from a flat "key = value" text file; every
// key has a default, unknown keys are rejected. See README for the key
// list. Mesh resolution can be given either as max_depth (number of octree
// levels, level 1 = base mesh) or as finest_dx, which must match the base
// spacing divided by a power of two.
struct RunConfig {
  ModelParams model;

  double domain_size = 800.0;
  int base_blocks = 4;
  int n_cells = 8;
  int max_depth = 5;
  double finest_dx = std::numeric_limits<double>::quiet_NaN();

  // refinement criterion weights and tolerance
  double e_phi = 1.0 / 3.0;
  double e_u = 1.0 / 3.0;
  double e_theta = 1.0 / 3.0;
  double eta = 1.0;

  StepController controller;
  SmootherConfig smoother;
  DefectWeights defect_weights;

  int remesh_interval = 1;
  int series_interval = 1;
  int export_interval = 0;      // 0 = only on demand
  int checkpoint_interval = 0;  // 0 = only on demand
  int velocity_window = 5;
  int workers = 0;  // 0 = PFSOLID_WORKERS env var, else 1
  std::string out_dir = "out";

  double level1_dx() const { return domain_size / (double(base_blocks) * n_cells); }

  // Applies finest_dx (when set) to max_depth and validates everything.
  void finalize();
  int resolved_workers() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Canonical "key = value" rendering containing every key (used to embed the
// configuration in checkpoints).
std::string render_config(const RunConfig& cfg);

}  // namespace pfs

#endif
