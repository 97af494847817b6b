#include "core/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pfs {

namespace {

struct KeyBinding {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse '" + value + "'");
  }
  while (used < value.size() && std::isspace(static_cast<unsigned char>(value[used])))
    ++used;
  if (used != value.size())
    throw config_error("config key '" + key + "': trailing junk in '" + value + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v))
    throw config_error("config key '" + key + "': expected an integer, got '" + value + "'");
  return int(v);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const std::map<std::string, KeyBinding>& bindings() {
  static const std::map<std::string, KeyBinding> table = [] {
    std::map<std::string, KeyBinding> t;
    auto dbl = [&t](const std::string& key, auto member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) {
                  c.*member = parse_double(key, v);
                },
                [member](const RunConfig& c) { return fmt(c.*member); }};
    };
    auto mdl = [&t](const std::string& key, auto member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) {
                  c.model.*member = parse_double(key, v);
                },
                [member](const RunConfig& c) { return fmt(c.model.*member); }};
    };
    auto ctl = [&t](const std::string& key, auto member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) {
                  c.controller.*member = parse_double(key, v);
                },
                [member](const RunConfig& c) { return fmt(c.controller.*member); }};
    };
    auto ctl_int = [&t](const std::string& key, auto member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) {
                  c.controller.*member = parse_int(key, v);
                },
                [member](const RunConfig& c) { return std::to_string(c.controller.*member); }};
    };
    auto smo_int = [&t](const std::string& key, auto member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) {
                  c.smoother.*member = parse_int(key, v);
                },
                [member](const RunConfig& c) { return std::to_string(c.smoother.*member); }};
    };
    auto num = [&t](const std::string& key, auto member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) {
                  c.*member = parse_int(key, v);
                },
                [member](const RunConfig& c) { return std::to_string(c.*member); }};
    };

    mdl("epsilon", &ModelParams::epsilon);
    mdl("mc_inf", &ModelParams::mc_inf);
    mdl("k_e", &ModelParams::k_e);
    mdl("lambda", &ModelParams::lambda);
    mdl("d_c", &ModelParams::d_c);
    mdl("lewis", &ModelParams::lewis);
    mdl("delta", &ModelParams::delta);
    mdl("r0", &ModelParams::r0);
    mdl("alpha_seed", &ModelParams::alpha_seed);
    mdl("q_threshold", &ModelParams::q_threshold);
    mdl("t_m", &ModelParams::t_m);
    mdl("m_slope", &ModelParams::m_slope);
    mdl("latent_l", &ModelParams::latent_l);
    mdl("c_p", &ModelParams::c_p);
    mdl("c_inf", &ModelParams::c_inf);

    dbl("domain_size", &RunConfig::domain_size);
    num("base_blocks", &RunConfig::base_blocks);
    num("n_cells", &RunConfig::n_cells);
    num("max_depth", &RunConfig::max_depth);
    dbl("finest_dx", &RunConfig::finest_dx);

    dbl("e_phi", &RunConfig::e_phi);
    dbl("e_u", &RunConfig::e_u);
    dbl("e_theta", &RunConfig::e_theta);
    dbl("eta", &RunConfig::eta);

    ctl_int("v_min", &StepController::v_min);
    ctl_int("v_max", &StepController::v_max);
    ctl_int("v_fail", &StepController::v_fail);
    ctl("d_max", &StepController::d_max);
    ctl("dt_growth", &StepController::growth);
    ctl("dt_shrink", &StepController::shrink);
    ctl("dt_init", &StepController::dt_init);

    t["omega"] = {[](RunConfig& c, const std::string& v) {
                    c.smoother.omega = parse_double("omega", v);
                  },
                  [](const RunConfig& c) { return fmt(c.smoother.omega); }};
    smo_int("pre_sweeps", &SmootherConfig::pre_sweeps);
    smo_int("post_sweeps", &SmootherConfig::post_sweeps);
    smo_int("coarse_sweeps", &SmootherConfig::coarse_sweeps);

    t["w_phi"] = {[](RunConfig& c, const std::string& v) {
                    c.defect_weights.phi = parse_double("w_phi", v);
                  },
                  [](const RunConfig& c) { return fmt(c.defect_weights.phi); }};
    t["w_u"] = {[](RunConfig& c, const std::string& v) {
                  c.defect_weights.u = parse_double("w_u", v);
                },
                [](const RunConfig& c) { return fmt(c.defect_weights.u); }};
    t["w_theta"] = {[](RunConfig& c, const std::string& v) {
                      c.defect_weights.theta = parse_double("w_theta", v);
                    },
                    [](const RunConfig& c) { return fmt(c.defect_weights.theta); }};

    num("remesh_interval", &RunConfig::remesh_interval);
    num("series_interval", &RunConfig::series_interval);
    num("export_interval", &RunConfig::export_interval);
    num("checkpoint_interval", &RunConfig::checkpoint_interval);
    num("velocity_window", &RunConfig::velocity_window);
    num("workers", &RunConfig::workers);
    t["out_dir"] = {[](RunConfig& c, const std::string& v) { c.out_dir = v; },
                    [](const RunConfig& c) { return c.out_dir; }};
    return t;
  }();
  return table;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = bindings().find(key);
    if (it == bindings().end())
      throw config_error("config line " + std::to_string(lineno) + ": unknown key '" +
                         key + "'");
    it->second.set(cfg, value);
  }
  cfg.finalize();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str());
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, binding] : bindings()) out << key << " = " << binding.get(cfg) << "\n";
  return out.str();
}

void RunConfig::finalize() {
  model.validate();
  controller.validate();
  smoother.validate();
  if (base_blocks < 1) throw config_error("base_blocks must be >= 1");
  if (n_cells < 4 || n_cells % 2 != 0) throw config_error("n_cells must be even and >= 4");
  if (!(domain_size > 0.0)) throw config_error("domain_size must be positive");
  if (remesh_interval < 1) throw config_error("remesh_interval must be >= 1");
  if (series_interval < 1) throw config_error("series_interval must be >= 1");
  if (export_interval < 0 || checkpoint_interval < 0)
    throw config_error("output intervals must be >= 0");
  if (velocity_window < 2) throw config_error("velocity_window must be >= 2");
  if (workers < 0) throw config_error("workers must be >= 0");
  if (std::isfinite(finest_dx)) {
    if (!(finest_dx > 0.0)) throw config_error("finest_dx must be positive");
    const double levels = 1.0 + std::log2(level1_dx() / finest_dx);
    const int depth = int(std::lround(levels));
    if (depth < 1 || std::abs(levels - depth) > 1e-9)
      throw config_error("finest_dx must equal the base spacing over a power of two");
    max_depth = depth;
  }
  if (max_depth < 1) throw config_error("max_depth must be >= 1");
  if (!(e_phi >= 0 && e_u >= 0 && e_theta >= 0))
    throw config_error("refinement weights must be nonnegative");
  if (!(eta > 0.0)) throw config_error("eta must be positive");
}

int RunConfig::resolved_workers() const {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("PFSOLID_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

}  // namespace pfs
