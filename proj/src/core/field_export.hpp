#ifndef PFS_CORE_FIELD_EXPORT_HPP
#define PFS_CORE_FIELD_EXPORT_HPP

#include <string>
#include <vector>

#include "core/diagnostics.hpp"
#include "core/mesh.hpp"
#include "core/params.hpp"

namespace pfs {

// Per-block rectilinear field export: a text header followed by one binary
// record per leaf block in Morton order (level, origin, spacing, then the
// phi, U, theta and c interiors, x fastest). Little-endian doubles; guard
// cells are never written. The README documents the layout and a numpy
// loader.
void export_fields(const std::string& path, const OctreeMesh& mesh,
                   const ModelParams& params, Plane p, double time, long step);

struct BlockDump {
  int level = 0;
  Vec3 origin{0, 0, 0};
  double dx = 0.0;
  std::vector<double> phi, u, theta, c;  // n^3 each, x fastest
};

struct FieldDump {
  double time = 0.0;
  long step = 0;
  int n_cells = 0;
  std::vector<BlockDump> blocks;
};

FieldDump import_fields(const std::string& path);

// Tip time series as CSV with a versioned header comment:
//   t,x_tip,r,v,dof,cycles,wall_ms
// Undefined radii are written as nan.
void write_series_csv(const std::string& path, const TipSeries& series);

}  // namespace pfs

#endif
