#include "core/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "core/diagnostics.hpp"
#include "core/mesh.hpp"
#include "core/model.hpp"
#include "core/timestep.hpp"

namespace pfs {

namespace {

struct Reporter {
  std::ostream& out;
  int failures = 0;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "ok   " : "FAIL ") << name;
    if (!detail.empty()) out << "  (" << detail << ")";
    out << "\n";
    if (!ok) ++failures;
  }
};

double aniso_energy(const Vec3& r, const ModelParams& p) {
  const GradientData gd = anisotropy(r, p);
  return 0.5 * gd.a_val * gd.a_val * gd.q;
}

void verify_gij(Reporter& rep) {
  ModelParams p;
  p.epsilon = 0.02;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double h = 1e-6;

  double worst_g = 0.0, worst_gm = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec3 r = {dist(rng), dist(rng), dist(rng)};
    if (norm2(r) < 0.05) {
      --trial;
      continue;
    }
    const GradientData gd = anisotropy(r, p);
    const Vec3 g = g_vector(gd, p);
    const Sym3 gm = g_matrix(gd, p);
    for (int i = 0; i < 3; ++i) {
      Vec3 rp = r, rm = r;
      rp[i] += h;
      rm[i] -= h;
      const double fd = (aniso_energy(rp, p) - aniso_energy(rm, p)) / (2.0 * h);
      worst_g = std::max(worst_g, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
      for (int j = 0; j <= i; ++j) {
        const Vec3 gp = g_vector(anisotropy(rp, p), p);
        const Vec3 gmv = g_vector(anisotropy(rm, p), p);
        const double fd2 = (gp[j] - gmv[j]) / (2.0 * h);
        worst_gm =
            std::max(worst_gm, std::abs(fd2 - gm(i, j)) / std::max(1.0, std::abs(gm(i, j))));
      }
    }
  }
  rep.check("gij: g_i matches d(.5 A^2 q)/dr_i on 1000 gradients", worst_g < 1e-5,
            "worst rel err " + std::to_string(worst_g));
  rep.check("gij: g_ij matches d(g_i)/dr_j on 1000 gradients", worst_gm < 1e-5,
            "worst rel err " + std::to_string(worst_gm));

  double worst_a = 0.0;
  for (int d = 0; d < 360; ++d) {
    const double psi = d * M_PI / 180.0;
    const GradientData gd = anisotropy({std::cos(psi), std::sin(psi), 0.0}, p);
    worst_a = std::max(worst_a,
                       std::abs(gd.a_val - (1.0 + p.epsilon * std::cos(4.0 * psi))));
  }
  rep.check("gij: in-plane A equals 1 + eps cos(4 psi)", worst_a < 1e-12,
            "worst abs err " + std::to_string(worst_a));
}

// Independent Morton oracle: sort blocks by their root z-key followed by the
// octant digits of the path from the root, shorter paths first.
std::vector<int> morton_oracle(const OctreeMesh& mesh) {
  struct Entry {
    std::vector<std::uint64_t> path;
    int id;
  };
  std::vector<Entry> entries;
  for (int id = 0; id < int(mesh.slot_count()); ++id) {
    const Block& b = mesh.block(id);
    if (!b.alive()) continue;
    Entry e;
    e.id = id;
    int cur = id;
    while (mesh.block(cur).parent >= 0) {
      e.path.push_back(std::uint64_t(mesh.block(cur).sibling));
      cur = mesh.block(cur).parent;
    }
    const Block& root = mesh.block(cur);
    std::uint64_t key = 0;
    for (int bit = 0; bit < 21; ++bit) {
      key |= (std::uint64_t(root.ci >> bit) & 1) << (3 * bit);
      key |= (std::uint64_t(root.cj >> bit) & 1) << (3 * bit + 1);
      key |= (std::uint64_t(root.ck >> bit) & 1) << (3 * bit + 2);
    }
    e.path.push_back(key);
    std::reverse(e.path.begin(), e.path.end());
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.path < b.path; });
  std::vector<int> order;
  for (const Entry& e : entries) order.push_back(e.id);
  return order;
}

void random_tree(OctreeMesh& mesh, std::mt19937& rng, int rounds) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int round = 0; round < rounds; ++round) {
    std::vector<RefineFlag> flags(mesh.slot_count(), RefineFlag::keep);
    for (int id = 0; id < int(mesh.slot_count()); ++id) {
      const Block& b = mesh.block(id);
      if (!b.alive() || !b.is_leaf()) continue;
      const double roll = dist(rng);
      if (roll < 0.25)
        flags[id] = RefineFlag::refine;
      else if (roll < 0.4)
        flags[id] = RefineFlag::derefine;
    }
    mesh.apply_flags(flags, {});
  }
}

void verify_morton(Reporter& rep) {
  std::mt19937 rng(777);
  bool morton_ok = true, level_ok = true, partition_ok = true;
  for (int trial = 0; trial < 60; ++trial) {
    OctreeMesh mesh(64.0, 2, 4, 4);
    random_tree(mesh, rng, 3);
    mesh.check_invariants();
    const auto order = mesh.morton_order();
    const auto oracle = morton_oracle(mesh);
    morton_ok = morton_ok && order == oracle;

    const auto level_order = mesh.morton_level_order();
    std::vector<int> expect;
    for (int level = 1; level <= mesh.num_levels(); ++level)
      for (int id : oracle)
        if (mesh.block(id).level == level) expect.push_back(id);
    level_ok = level_ok && level_order == expect;

    for (int workers : {1, 2, 3, 5, 8}) {
      const auto owner = partition(mesh, level_order, workers);
      for (int level = 1; level <= mesh.num_levels(); ++level) {
        std::vector<int> counts(workers, 0);
        for (std::size_t i = 0; i < level_order.size(); ++i)
          if (mesh.block(level_order[i]).level == level) ++counts[owner[i]];
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        partition_ok = partition_ok && (*hi - *lo) <= 1;
      }
    }
  }
  rep.check("morton: recursive ordering matches brute-force oracle", morton_ok);
  rep.check("morton: level ordering is the level-grouped Morton order", level_ok);
  rep.check("morton: per-level partition imbalance <= 1 block", partition_ok);
}

void verify_tip(Reporter& rep) {
  ModelParams p;
  p.r0 = 20.0;
  p.alpha_seed = 0.6;
  OctreeMesh mesh(50.0, 4, 8, 3);  // finest dx = 50/32/4 = 0.390625
  initialize(mesh, p);
  const std::array<Plane, 2> planes = {Plane::old, Plane::old2};
  for (int pass = 0; pass < 4; ++pass) {
    for (Var v : {Var::phi, Var::u, Var::theta}) mesh.fill_guards(v, Plane::old);
    const auto flags = mesh.flag_refinement(1.0, 0.0, 0.0, 0.15, Plane::old);
    if (!mesh.apply_flags(flags, planes)) break;
    initialize(mesh, p);
  }
  mesh.fill_guards(Var::phi, Plane::old);
  const auto tip = tip_radius(mesh, Plane::old);
  const bool found = tip.has_value() && tip->radius_defined;
  const double err = found ? std::abs(tip->radius - 20.0) / 20.0 : 1.0;
  rep.check("tip: sphere R=20 at dx=0.39 recovered within 2%", found && err < 0.02,
            found ? "rel err " + std::to_string(err) : "no crossing");
}

void verify_bdf2(Reporter& rep) {
  const Bdf2Coeffs c1 = bdf2_coeffs(1.0);
  rep.check("bdf2: r=1 coefficients are exactly (2/3, 4/3, 1/3)",
            c1.r1 == 2.0 / 3.0 && c1.r2 == 4.0 / 3.0 && c1.r3 == 1.0 / 3.0);

  // y' = -y on [0,1]; one deliberately non-unity ratio step mid-run, first
  // step backward Euler as in production.
  auto run = [](int n) {
    std::vector<double> dts(std::size_t(n), 1.0 / n);
    dts[std::size_t(n) / 2] *= 0.5;  // ratio change
    double y_nm1 = 1.0;
    double y_n = y_nm1 / (1.0 + dts[0]);
    double t = dts[0];
    for (std::size_t s = 1; s < dts.size(); ++s) {
      const Bdf2Coeffs c = bdf2_coeffs(dts[s] / dts[s - 1]);
      const double star = c.r2 * y_n - c.r3 * y_nm1;
      y_nm1 = y_n;
      y_n = star / (1.0 + c.r1 * dts[s]);
      t += dts[s];
    }
    return std::abs(y_n - std::exp(-t));
  };
  const double e1 = run(40), e2 = run(80), e3 = run(160);
  const double ord1 = std::log2(e1 / e2), ord2 = std::log2(e2 / e3);
  const bool ok = std::abs(ord1 - 2.0) < 0.1 && std::abs(ord2 - 2.0) < 0.1;
  rep.check("bdf2: measured order 2.0 +- 0.1 on y' = -y with a ratio step", ok,
            "orders " + std::to_string(ord1) + ", " + std::to_string(ord2));
}

}  // namespace

int run_verify(const std::string& suite, std::ostream& out) {
  Reporter rep{out};
  const bool all = suite.empty();
  bool matched = false;
  if (all || suite == "gij") {
    verify_gij(rep);
    matched = true;
  }
  if (all || suite == "morton") {
    verify_morton(rep);
    matched = true;
  }
  if (all || suite == "tip") {
    verify_tip(rep);
    matched = true;
  }
  if (all || suite == "bdf2") {
    verify_bdf2(rep);
    matched = true;
  }
  if (!matched) {
    out << "unknown verify suite '" << suite << "' (gij, morton, tip, bdf2)\n";
    return 1;
  }
  out << (rep.failures == 0 ? "verify: all checks passed\n"
                            : "verify: " + std::to_string(rep.failures) + " failures\n");
  return rep.failures;
}

}  // namespace pfs
