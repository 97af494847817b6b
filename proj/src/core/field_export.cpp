#include "core/field_export.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "core/model.hpp"

namespace pfs {

void export_fields(const std::string& path, const OctreeMesh& mesh,
                   const ModelParams& params, Plane p, double time, long step) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open field export '" + path + "' for writing");

  const std::vector<int> morton = mesh.morton_order();
  std::uint64_t leaf_count = 0;
  for (int id : morton)
    if (mesh.block(id).is_leaf()) ++leaf_count;

  std::ostringstream header;
  header.precision(17);
  header << "pfsolid-fields 1\n"
         << "endian little\n"
         << "time " << time << "\n"
         << "step " << step << "\n"
         << "n_cells " << mesh.n_cells() << "\n"
         << "block_count " << leaf_count << "\n"
         << "fields phi u theta c level\n"
         << "end_header\n";
  const std::string head = header.str();
  out.write(head.data(), std::streamsize(head.size()));

  const int n = mesh.n_cells();
  std::vector<double> conc(std::size_t(n) * n * n);
  for (int id : morton) {
    const Block& b = mesh.block(id);
    if (!b.is_leaf()) continue;
    const std::int32_t level = b.level;
    const Vec3 origin = mesh.block_origin(b);
    const double dx = mesh.level_dx(b.level);
    out.write(reinterpret_cast<const char*>(&level), sizeof(level));
    out.write(reinterpret_cast<const char*>(origin.data()), sizeof(double) * 3);
    out.write(reinterpret_cast<const char*>(&dx), sizeof(dx));

    const double* phi = mesh.plane(id, Var::phi, p);
    const double* u = mesh.plane(id, Var::u, p);
    const double* th = mesh.plane(id, Var::theta, p);
    auto write_interior = [&](const double* f) {
      for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j)
          out.write(reinterpret_cast<const char*>(f + mesh.cell_index(1, j, k)),
                    std::streamsize(std::size_t(n) * sizeof(double)));
    };
    write_interior(phi);
    write_interior(u);
    write_interior(th);
    std::size_t pos = 0;
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) {
          const int c = mesh.cell_index(i, j, k);
          conc[pos++] = c_from_u(u[c], phi[c], params);
        }
    out.write(reinterpret_cast<const char*>(conc.data()),
              std::streamsize(conc.size() * sizeof(double)));
  }
  if (!out) throw io_error("failed writing field export '" + path + "'");
}

FieldDump import_fields(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open field export '" + path + "'");

  FieldDump dump;
  std::uint64_t block_count = 0;
  std::string line;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end_header") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "pfsolid-fields") {
      int version = 0;
      ls >> version;
      if (version != 1) throw io_error("unsupported field export version");
    } else if (key == "time") {
      ls >> dump.time;
    } else if (key == "step") {
      ls >> dump.step;
    } else if (key == "n_cells") {
      ls >> dump.n_cells;
    } else if (key == "block_count") {
      ls >> block_count;
    }
  }
  if (!ended || dump.n_cells <= 0) throw io_error("malformed field export header");

  const std::size_t vals = std::size_t(dump.n_cells) * dump.n_cells * dump.n_cells;
  for (std::uint64_t bi = 0; bi < block_count; ++bi) {
    BlockDump b;
    std::int32_t level;
    in.read(reinterpret_cast<char*>(&level), sizeof(level));
    in.read(reinterpret_cast<char*>(b.origin.data()), sizeof(double) * 3);
    in.read(reinterpret_cast<char*>(&b.dx), sizeof(double));
    b.level = level;
    auto read_field = [&](std::vector<double>& f) {
      f.resize(vals);
      in.read(reinterpret_cast<char*>(f.data()), std::streamsize(vals * sizeof(double)));
    };
    read_field(b.phi);
    read_field(b.u);
    read_field(b.theta);
    read_field(b.c);
    if (!in) throw io_error("field export truncated");
    dump.blocks.push_back(std::move(b));
  }
  return dump;
}

void write_series_csv(const std::string& path, const TipSeries& series) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open series file '" + path + "' for writing");
  out << "# pfsolid-series v1\n";
  out << "t,x_tip,r,v,dof,cycles,wall_ms\n";
  out.precision(17);
  for (const TipSample& s : series.samples()) {
    out << s.t << ',' << s.x_tip << ',';
    if (s.radius_defined)
      out << s.radius;
    else
      out << "nan";
    out << ',' << s.velocity << ',' << s.dof << ',' << s.cycles << ',' << s.wall_ms
        << '\n';
  }
  if (!out) throw io_error("failed writing series file '" + path + "'");
}

}  // namespace pfs
