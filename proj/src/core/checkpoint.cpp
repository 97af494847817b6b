#include "core/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace pfs {

namespace {

constexpr char kMagic[8] = {'P', 'F', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kEndianSentinel = 0x01020304u;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw io_error("checkpoint truncated");
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const OctreeMesh& mesh,
                      const RunConfig& cfg, const TimeHistory& history,
                      const TipSeries& series) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open checkpoint file '" + path + "' for writing");

  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, kEndianSentinel);

  const std::string config_text = render_config(cfg);
  put(out, std::uint64_t(config_text.size()));
  out.write(config_text.data(), std::streamsize(config_text.size()));

  put(out, history.time);
  put(out, std::int64_t(history.step));
  put(out, history.dt_prev);
  put(out, history.dt_next);
  put(out, std::uint8_t(history.have_two_levels ? 1 : 0));

  put(out, std::uint64_t(series.samples().size()));
  for (const TipSample& s : series.samples()) {
    put(out, s.t);
    put(out, s.x_tip);
    put(out, s.radius);
    put(out, s.velocity);
    put(out, std::uint64_t(s.dof));
    put(out, std::int32_t(s.cycles));
    put(out, s.wall_ms);
    put(out, std::uint8_t(s.radius_defined ? 1 : 0));
  }

  const std::vector<int> morton = mesh.morton_order();
  std::uint64_t leaf_count = 0;
  for (int id : morton)
    if (mesh.block(id).is_leaf()) ++leaf_count;
  put(out, leaf_count);

  const int n = mesh.n_cells();
  for (int id : morton) {
    const Block& b = mesh.block(id);
    if (!b.is_leaf()) continue;
    put(out, std::int32_t(b.level));
    put(out, std::int32_t(b.ci));
    put(out, std::int32_t(b.cj));
    put(out, std::int32_t(b.ck));
    for (Plane p : {Plane::old, Plane::old2})
      for (Var v : {Var::phi, Var::u, Var::theta}) {
        const double* f = mesh.plane(id, v, p);
        for (int k = 1; k <= n; ++k)
          for (int j = 1; j <= n; ++j)
            out.write(reinterpret_cast<const char*>(f + mesh.cell_index(1, j, k)),
                      std::streamsize(std::size_t(n) * sizeof(double)));
      }
  }
  if (!out) throw io_error("failed writing checkpoint '" + path + "'");
}

LoadedCheckpoint read_checkpoint(const std::string& path,
                                 std::optional<int> max_depth_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open checkpoint file '" + path + "'");

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw io_error("'" + path + "' is not a pfsolid checkpoint");
  if (get<std::uint32_t>(in) != kVersion)
    throw io_error("checkpoint version mismatch in '" + path + "'");
  if (get<std::uint32_t>(in) != kEndianSentinel)
    throw io_error("checkpoint byte order mismatch in '" + path + "'");

  LoadedCheckpoint out;

  const std::uint64_t config_len = get<std::uint64_t>(in);
  std::string config_text(config_len, '\0');
  in.read(config_text.data(), std::streamsize(config_len));
  if (!in) throw io_error("checkpoint truncated");
  out.config = parse_config(config_text);

  out.history.time = get<double>(in);
  out.history.step = long(get<std::int64_t>(in));
  out.history.dt_prev = get<double>(in);
  const double dt_next = get<double>(in);
  out.history.have_two_levels = get<std::uint8_t>(in) != 0;
  out.history.set_dt_next(dt_next);

  out.series.set_window(out.config.velocity_window);
  const std::uint64_t nsamples = get<std::uint64_t>(in);
  for (std::uint64_t s = 0; s < nsamples; ++s) {
    TipSample sample;
    sample.t = get<double>(in);
    sample.x_tip = get<double>(in);
    sample.radius = get<double>(in);
    sample.velocity = get<double>(in);
    sample.dof = get<std::uint64_t>(in);
    sample.cycles = int(get<std::int32_t>(in));
    sample.wall_ms = get<double>(in);
    sample.radius_defined = get<std::uint8_t>(in) != 0;
    out.series.samples().push_back(sample);
  }

  if (max_depth_override) {
    if (*max_depth_override < out.config.max_depth)
      throw config_error("restart max depth " + std::to_string(*max_depth_override) +
                         " is below the checkpoint depth " +
                         std::to_string(out.config.max_depth));
    out.config.max_depth = *max_depth_override;
    out.config.finest_dx = std::numeric_limits<double>::quiet_NaN();
  }

  out.mesh = std::make_unique<OctreeMesh>(out.config.domain_size, out.config.base_blocks,
                                          out.config.n_cells, out.config.max_depth);
  OctreeMesh& mesh = *out.mesh;

  struct StoredLeaf {
    int level, ci, cj, ck;
    std::vector<double> data;  // 2 planes x 3 vars x n^3
  };
  const std::uint64_t leaf_count = get<std::uint64_t>(in);
  const int n = mesh.n_cells();
  const std::size_t vals = std::size_t(2) * 3 * n * n * n;
  std::vector<StoredLeaf> leaves;
  leaves.reserve(leaf_count);
  for (std::uint64_t s = 0; s < leaf_count; ++s) {
    StoredLeaf leaf;
    leaf.level = int(get<std::int32_t>(in));
    leaf.ci = int(get<std::int32_t>(in));
    leaf.cj = int(get<std::int32_t>(in));
    leaf.ck = int(get<std::int32_t>(in));
    leaf.data.resize(vals);
    in.read(reinterpret_cast<char*>(leaf.data.data()),
            std::streamsize(vals * sizeof(double)));
    if (!in) throw io_error("checkpoint truncated");
    leaves.push_back(std::move(leaf));
  }

  // Rebuild the tree: create every ancestor of every stored leaf, then load
  // cell data. Stored leaves arrive in Morton order, so block creation is
  // deterministic.
  for (const StoredLeaf& leaf : leaves) {
    for (int lvl = 2; lvl <= leaf.level; ++lvl) {
      const int shift = leaf.level - lvl;
      const int ci = leaf.ci >> shift, cj = leaf.cj >> shift, ck = leaf.ck >> shift;
      if (mesh.find_block(lvl, ci, cj, ck) >= 0) continue;
      const int parent = mesh.find_block(lvl - 1, ci >> 1, cj >> 1, ck >> 1);
      if (parent < 0) throw io_error("checkpoint block tree is inconsistent");
      mesh.refine(parent);
    }
  }
  for (const StoredLeaf& leaf : leaves) {
    const int id = mesh.find_block(leaf.level, leaf.ci, leaf.cj, leaf.ck);
    if (id < 0 || !mesh.block(id).is_leaf())
      throw io_error("checkpoint block tree is inconsistent");
    std::size_t pos = 0;
    for (Plane p : {Plane::old, Plane::old2})
      for (Var v : {Var::phi, Var::u, Var::theta}) {
        double* f = mesh.plane(id, v, p);
        for (int k = 1; k <= n; ++k)
          for (int j = 1; j <= n; ++j)
            for (int i = 1; i <= n; ++i) f[mesh.cell_index(i, j, k)] = leaf.data[pos++];
      }
  }
  mesh.check_invariants();
  return out;
}

}  // namespace pfs
