#include "core/bench.hpp"

#include <cmath>
#include <fstream>

#include "core/simulation.hpp"

#include <cstdio>
#include <filesystem>
#include <unistd.h>

namespace pfs {

std::vector<BenchStage> parse_bench_stages(const std::string& text) {
  std::vector<BenchStage> stages;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string token = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (token.empty()) continue;
    BenchStage stage;
    const std::size_t at = token.find('@');
    try {
      if (at == std::string::npos) {
        stage.max_depth = std::stoi(token);
      } else {
        stage.max_depth = std::stoi(token.substr(0, at));
        stage.eta = std::stod(token.substr(at + 1));
      }
    } catch (const std::exception&) {
      throw config_error("bad bench stage token '" + token + "'");
    }
    if (stage.max_depth < 1) throw config_error("bench stage depth must be >= 1");
    stages.push_back(stage);
  }
  if (stages.empty()) throw config_error("no bench stages given");
  return stages;
}

namespace {

bool is_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  return in && std::string(magic, 8) == "PFSCKPT1";
}

}  // namespace

BenchResult bench_scaling(const std::string& snapshot_or_config,
                          const std::vector<BenchStage>& stages, int steps_per_stage,
                          int workers, double until_time) {
  if (steps_per_stage < 1) throw config_error("bench needs steps_per_stage >= 1");

  // A config input is advanced to until_time first to produce the snapshot.
  std::string checkpoint_path = snapshot_or_config;
  std::string temp_snapshot;
  if (!is_checkpoint_file(snapshot_or_config)) {
    const RunConfig cfg = load_config_file(snapshot_or_config);
    Simulation sim(cfg, workers);
    long guard = 0;
    while (sim.time() < until_time && guard++ < 100000) sim.step();
    temp_snapshot = (std::filesystem::temp_directory_path() /
                     ("pfsolid_bench_" + std::to_string(::getpid()) + ".pfsckpt"))
                        .string();
    sim.write_checkpoint(temp_snapshot);
    checkpoint_path = temp_snapshot;
  }

  BenchResult result;
  for (const BenchStage& stage : stages) {
    LoadedCheckpoint ck = read_checkpoint(checkpoint_path, stage.max_depth);
    if (stage.eta > 0.0) ck.config.eta = stage.eta;
    ck.config.series_interval = 1;
    ck.config.export_interval = 0;
    ck.config.checkpoint_interval = 0;
    Simulation sim(std::move(ck), workers);

    sim.step();  // warm-up: the restart adapts to the stage depth here
    BenchRow row;
    row.max_depth = stage.max_depth;
    double total_ms = 0.0;
    double total_cycles = 0.0;
    for (int s = 0; s < steps_per_stage; ++s) {
      const auto stats = sim.step();
      total_ms += stats.wall_ms;
      total_cycles += stats.cycles;
    }
    row.dof = sim.dof();
    row.ms_per_step = total_ms / steps_per_stage;
    row.cycles_per_step = total_cycles / steps_per_stage;
    result.rows.push_back(row);
  }
  if (!temp_snapshot.empty()) std::filesystem::remove(temp_snapshot);

  if (result.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(result.rows.size());
    for (const BenchRow& r : result.rows) {
      const double x = std::log10(double(r.dof));
      const double y = std::log10(r.ms_per_step);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    if (den > 0) {
      result.slope = (m * sxy - sx * sy) / den;
      result.slope_defined = true;
    }
  }
  return result;
}

void write_bench_csv(const std::string& path, const BenchResult& result) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open bench output '" + path + "'");
  out << "# pfsolid-bench v1\n";
  out << "max_depth,dof,ms_per_step,cycles_per_step\n";
  out.precision(17);
  for (const BenchRow& r : result.rows)
    out << r.max_depth << ',' << r.dof << ',' << r.ms_per_step << ','
        << r.cycles_per_step << '\n';
  out << "# slope ";
  if (result.slope_defined)
    out << result.slope << '\n';
  else
    out << "undefined\n";
}

}  // namespace pfs
