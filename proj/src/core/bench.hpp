#ifndef PFS_CORE_BENCH_HPP
#define PFS_CORE_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace pfs {

// One benchmark stage: restart the snapshot allowing max_depth levels, with
// an optional refinement tolerance override (eta <= 0 keeps the config
// value). Finer stages need a tighter eta to actually deepen the mesh.
struct BenchStage {
  int max_depth = 0;
  double eta = 0.0;
};

struct BenchRow {
  int max_depth = 0;
  std::uint64_t dof = 0;
  double ms_per_step = 0.0;
  double cycles_per_step = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double slope = 0.0;  // log-log slope of ms_per_step vs dof
  bool slope_defined = false;
};

// Parse "4,5,6" or "4@0.2,5@0.1,6@0.05" into stages.
std::vector<BenchStage> parse_bench_stages(const std::string& text);

// Time solver steps at increasing refinement of one snapshot. Each stage
// restarts the checkpoint with its depth/eta, takes one warm-up step (the
// mesh adapts there), then averages wall time over steps_per_stage steps.
// The input may be a checkpoint, or a run config that is first advanced to
// until_time to produce the snapshot.
BenchResult bench_scaling(const std::string& snapshot_or_config,
                          const std::vector<BenchStage>& stages, int steps_per_stage,
                          int workers, double until_time = 10.0);

void write_bench_csv(const std::string& path, const BenchResult& result);

}  // namespace pfs

#endif
