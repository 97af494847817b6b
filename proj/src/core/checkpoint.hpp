#ifndef PFS_CORE_CHECKPOINT_HPP
#define PFS_CORE_CHECKPOINT_HPP

#include <memory>
#include <optional>
#include <string>

#include "core/config.hpp"
#include "core/diagnostics.hpp"
#include "core/mesh.hpp"
#include "core/timestep.hpp"

namespace pfs {

// Single self-describing binary checkpoint: header (magic, version, endian
// sentinel), the canonical config text, step/time state, the tip series,
// then every leaf block in Morton order with its old and old-1 field
// levels. Everything else (covered blocks, star arrays, guards) is derived
// state and rebuilt on load, so a round trip is bit exact.
void write_checkpoint(const std::string& path, const OctreeMesh& mesh,
                      const RunConfig& cfg, const TimeHistory& history,
                      const TipSeries& series);

struct LoadedCheckpoint {
  RunConfig config;
  TimeHistory history{1e-6};
  TipSeries series;
  std::unique_ptr<OctreeMesh> mesh;
};

// Reload a checkpoint. max_depth_override, when given, must be at least the
// stored depth; a larger value permits deeper refinement from the next
// adaptation pass on (the restart-at-finer-mesh protocol).
LoadedCheckpoint read_checkpoint(const std::string& path,
                                 std::optional<int> max_depth_override = std::nullopt);

}  // namespace pfs

#endif
