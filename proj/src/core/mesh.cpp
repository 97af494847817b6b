// Octree block mesh: guard fills, transfer operators, refinement with 2:1
// balance, Morton orderings.

#include "core/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfs {

namespace {

std::uint64_t coord_key(int ci, int cj, int ck) {
  return (std::uint64_t(std::uint32_t(ci)) & 0x1FFFFF) |
         ((std::uint64_t(std::uint32_t(cj)) & 0x1FFFFF) << 21) |
         ((std::uint64_t(std::uint32_t(ck)) & 0x1FFFFF) << 42);
}

// Bit interleave (x lowest) for deterministic root and sibling-set ordering.
std::uint64_t z_key(int ci, int cj, int ck) {
  std::uint64_t key = 0;
  for (int bit = 0; bit < 21; ++bit) {
    key |= (std::uint64_t(ci >> bit) & 1) << (3 * bit);
    key |= (std::uint64_t(cj >> bit) & 1) << (3 * bit + 1);
    key |= (std::uint64_t(ck >> bit) & 1) << (3 * bit + 2);
  }
  return key;
}

constexpr double kWNear = 0.75;  // 1D trilinear weights: 3/4 toward the
constexpr double kWFar = 0.25;   // containing cell, 1/4 to the next one

}  // namespace

OctreeMesh::OctreeMesh(double domain_size, int base_blocks, int n_cells, int max_depth)
    : domain_size_(domain_size),
      base_blocks_(base_blocks),
      n_cells_(n_cells),
      max_depth_(max_depth) {
  if (!(domain_size > 0.0)) throw config_error("domain_size must be positive");
  if (base_blocks < 1) throw config_error("base_blocks must be >= 1");
  if (n_cells < 4 || n_cells % 2 != 0) throw config_error("n_cells must be even and >= 4");
  if (max_depth < 1) throw config_error("max_depth must be >= 1");

  level_ids_.resize(std::size_t(max_depth) + 2);
  maps_.resize(std::size_t(max_depth) + 2);

  for (int ck = 0; ck < base_blocks; ++ck)
    for (int cj = 0; cj < base_blocks; ++cj)
      for (int ci = 0; ci < base_blocks; ++ci) {
        int id = allocate_block();
        Block& b = blocks_[id];
        b.level = 1;
        b.parent = -1;
        b.sibling = 0;
        b.ci = ci;
        b.cj = cj;
        b.ck = ck;
        insert_into_maps(id);
      }
}

double OctreeMesh::level_dx(int level) const {
  return domain_size_ / (double(base_blocks_) * n_cells_) / double(1 << (level - 1));
}

void OctreeMesh::set_max_depth(int depth) {
  if (depth < num_levels())
    throw config_error("max_depth below the deepest existing level");
  max_depth_ = depth;
  level_ids_.resize(std::size_t(depth) + 2);
  maps_.resize(std::size_t(depth) + 2);
}

Vec3 OctreeMesh::block_origin(const Block& b) const {
  const double edge = block_edge(b.level);
  return {b.ci * edge, b.cj * edge, b.ck * edge};
}

Vec3 OctreeMesh::cell_center(const Block& b, int i, int j, int k) const {
  const double dx = level_dx(b.level);
  const Vec3 o = block_origin(b);
  return {o[0] + (i - 0.5) * dx, o[1] + (j - 0.5) * dx, o[2] + (k - 0.5) * dx};
}

int OctreeMesh::num_levels() const {
  int deepest = 1;
  for (int l = 1; l < int(level_ids_.size()); ++l)
    if (!level_ids_[l].empty()) deepest = l;
  return deepest;
}

const std::vector<int>& OctreeMesh::level_ids(int level) const {
  static const std::vector<int> empty;
  if (level < 1 || level >= int(level_ids_.size())) return empty;
  return level_ids_[level];
}

std::vector<int> OctreeMesh::leaf_ids() const {
  std::vector<int> out;
  for (int id = 0; id < int(blocks_.size()); ++id)
    if (blocks_[id].alive() && blocks_[id].is_leaf()) out.push_back(id);
  return out;
}

std::uint64_t OctreeMesh::leaf_cell_count() const {
  std::uint64_t n = 0;
  for (const Block& b : blocks_)
    if (b.alive() && b.is_leaf()) n += std::uint64_t(cells_per_block());
  return n;
}

int OctreeMesh::find_block(int level, int ci, int cj, int ck) const {
  if (level < 1 || level >= int(maps_.size())) return -1;
  auto it = maps_[level].find(coord_key(ci, cj, ck));
  return it == maps_[level].end() ? -1 : it->second;
}

int OctreeMesh::allocate_block() {
  int id;
  if (!free_slots_.empty()) {
    id = free_slots_.back();
    free_slots_.pop_back();
  } else {
    id = int(blocks_.size());
    blocks_.emplace_back();
  }
  Block& b = blocks_[id];
  b = Block{};
  b.data.assign(std::size_t(kNumVars) * kNumPlanes * plane_size(), 0.0);
  return id;
}

void OctreeMesh::release_block(int id) {
  Block& b = blocks_[id];
  b.level = 0;
  b.parent = -1;
  b.children.fill(-1);
  std::vector<double>().swap(b.data);
  free_slots_.push_back(id);
}

void OctreeMesh::insert_into_maps(int id) {
  const Block& b = blocks_[id];
  level_ids_[b.level].push_back(id);
  maps_[b.level][coord_key(b.ci, b.cj, b.ck)] = id;
}

void OctreeMesh::remove_from_maps(int id) {
  const Block& b = blocks_[id];
  auto& ids = level_ids_[b.level];
  ids.erase(std::find(ids.begin(), ids.end(), id));
  maps_[b.level].erase(coord_key(b.ci, b.cj, b.ck));
}

// ---------------------------------------------------------------------------
// Transfer operators
// ---------------------------------------------------------------------------

void OctreeMesh::restrict_child_into_parent(int parent_id, int child_octant, Var v,
                                            Plane src, Plane dst) {
  const Block& parent = blocks_[parent_id];
  const double* fine = plane(parent.children[child_octant], v, src);
  double* coarse = plane(parent_id, v, dst);
  const int half = n_cells_ / 2;
  const int oi = (child_octant & 1) * half;
  const int oj = ((child_octant >> 1) & 1) * half;
  const int ok = ((child_octant >> 2) & 1) * half;
  for (int pk = 1; pk <= half; ++pk)
    for (int pj = 1; pj <= half; ++pj)
      for (int pi = 1; pi <= half; ++pi) {
        const int fi = 2 * pi - 1, fj = 2 * pj - 1, fk = 2 * pk - 1;
        double sum = 0.0;
        for (int dk = 0; dk < 2; ++dk)
          for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di)
              sum += fine[cell_index(fi + di, fj + dj, fk + dk)];
        coarse[cell_index(pi + oi, pj + oj, pk + ok)] = 0.125 * sum;
      }
}

namespace {
// Trilinear read around the containing coarse cell (li, lj, lk) with parity
// signs s* pointing at the second-nearest cell per axis.
inline double trilinear(const double* coarse, int side, int li, int lj, int lk, int si,
                        int sj, int sk) {
  auto idx = [side](int i, int j, int k) { return (k * side + j) * side + i; };
  double val = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double wz = c ? kWFar : kWNear;
    const int kk = c ? lk + sk : lk;
    for (int b = 0; b < 2; ++b) {
      const double wyz = (b ? kWFar : kWNear) * wz;
      const int jj = b ? lj + sj : lj;
      for (int a = 0; a < 2; ++a) {
        const double w = (a ? kWFar : kWNear) * wyz;
        const int ii = a ? li + si : li;
        val += w * coarse[idx(ii, jj, kk)];
      }
    }
  }
  return val;
}
}  // namespace

void OctreeMesh::prolong_parent_into_child(int parent_id, int child_octant, Var v,
                                           Plane src, Plane dst, bool additive) {
  const Block& parent = blocks_[parent_id];
  const int child_id = parent.children[child_octant];
  const Block& child = blocks_[child_id];
  const double* coarse = plane(parent_id, v, src);
  double* fine = plane(child_id, v, dst);
  const int s = side();
  for (int k = 1; k <= n_cells_; ++k)
    for (int j = 1; j <= n_cells_; ++j)
      for (int i = 1; i <= n_cells_; ++i) {
        // Global fine cell coordinates relative to the parent block origin.
        const int gi = (child.ci - 2 * parent.ci) * n_cells_ + i - 1;
        const int gj = (child.cj - 2 * parent.cj) * n_cells_ + j - 1;
        const int gk = (child.ck - 2 * parent.ck) * n_cells_ + k - 1;
        const int li = gi / 2 + 1, lj = gj / 2 + 1, lk = gk / 2 + 1;
        const int si = (gi & 1) ? 1 : -1;
        const int sj = (gj & 1) ? 1 : -1;
        const int sk = (gk & 1) ? 1 : -1;
        const double val = trilinear(coarse, s, li, lj, lk, si, sj, sk);
        double& out = fine[cell_index(i, j, k)];
        out = additive ? out + val : val;
      }
}

void OctreeMesh::sync_covered(Var v, Plane p) {
  for (int level = num_levels() - 1; level >= 1; --level)
    for (int id : level_ids_[level]) {
      if (blocks_[id].is_leaf()) continue;
      for (int c = 0; c < 8; ++c) restrict_child_into_parent(id, c, v, p, p);
    }
}

OctreeMesh::NeighborRef OctreeMesh::resolve_neighbor(const Block& b,
                                                     const std::array<int, 3>& d) const {
  NeighborRef ref;
  const int blocks_per_axis = base_blocks_ << (b.level - 1);
  std::array<int, 3> oc = {b.ci, b.cj, b.ck};
  for (int ax = 0; ax < 3; ++ax) {
    if (d[ax] == 0) continue;
    const int t = oc[ax] + d[ax];
    if (t < 0 || t >= blocks_per_axis)
      ref.flip[ax] = true;  // domain boundary: mirror back into this block
    else
      oc[ax] = t;
  }
  ref.id = find_block(b.level, oc[0], oc[1], oc[2]);
  if (ref.id < 0) {
    ref.coarse_id = find_block(b.level - 1, oc[0] >> 1, oc[1] >> 1, oc[2] >> 1);
    if (ref.coarse_id < 0)
      throw numeric_error("guard fill on unbalanced mesh at level " +
                          std::to_string(b.level));
  }
  return ref;
}

void OctreeMesh::fill_block_guards(int id, Var v, Plane p) {
  const int n = n_cells_;
  const int s = side();
  {
    Block& b = blocks_[id];
    const int level = b.level;
    double* dst = plane(id, v, p);
    const int tot = base_blocks_ * n * (1 << (level - 1));  // cells per axis
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const std::array<int, 3> d = {dx, dy, dz};
          const NeighborRef ref = resolve_neighbor(b, d);
          const std::array<int, 3> bc = {b.ci, b.cj, b.ck};
          // Local index ranges of this guard region.
          int lo[3], hi[3];
          for (int ax = 0; ax < 3; ++ax) {
            if (d[ax] == 0) {
              lo[ax] = 1;
              hi[ax] = n;
            } else {
              lo[ax] = hi[ax] = d[ax] > 0 ? s - 1 : 0;
            }
          }
          for (int k = lo[2]; k <= hi[2]; ++k)
            for (int j = lo[1]; j <= hi[1]; ++j)
              for (int i = lo[0]; i <= hi[0]; ++i) {
                const int loc[3] = {i, j, k};
                int g[3];  // global fine cell coordinates after mirroring
                for (int ax = 0; ax < 3; ++ax) {
                  g[ax] = bc[ax] * n + loc[ax] - 1;
                  if (g[ax] < 0) g[ax] = -1 - g[ax];
                  if (g[ax] >= tot) g[ax] = 2 * tot - 1 - g[ax];
                }
                double val;
                if (ref.id >= 0) {
                  const Block& nb = blocks_[ref.id];
                  const int oi = g[0] - nb.ci * n + 1;
                  const int oj = g[1] - nb.cj * n + 1;
                  const int ok = g[2] - nb.ck * n + 1;
                  val = plane(ref.id, v, p)[cell_index(oi, oj, ok)];
                } else {
                  const Block& nb = blocks_[ref.coarse_id];
                  const int cg[3] = {g[0] >> 1, g[1] >> 1, g[2] >> 1};
                  const int li = cg[0] - nb.ci * n + 1;
                  const int lj = cg[1] - nb.cj * n + 1;
                  const int lk = cg[2] - nb.ck * n + 1;
                  val = trilinear(plane(ref.coarse_id, v, p), s, li, lj, lk,
                                  (g[0] & 1) ? 1 : -1, (g[1] & 1) ? 1 : -1,
                                  (g[2] & 1) ? 1 : -1);
                }
                dst[cell_index(i, j, k)] = val;
              }
        }
  }
}

void OctreeMesh::fill_level_guards(int level, Var v, Plane p) {
  for (int id : level_ids_[level]) fill_block_guards(id, v, p);
}

void OctreeMesh::fill_guards(Var v, Plane p) {
  sync_covered(v, p);
  const int deepest = num_levels();
  for (int level = 1; level <= deepest; ++level) fill_level_guards(level, v, p);
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

std::vector<RefineFlag> OctreeMesh::flag_refinement(double e_phi, double e_u,
                                                    double e_theta, double eta,
                                                    Plane p) const {
  std::vector<RefineFlag> flags(blocks_.size(), RefineFlag::keep);
  for (int id = 0; id < int(blocks_.size()); ++id) {
    const Block& b = blocks_[id];
    if (!b.alive() || !b.is_leaf()) continue;
    const double* f_phi = plane(id, Var::phi, p);
    const double* f_u = plane(id, Var::u, p);
    const double* f_th = plane(id, Var::theta, p);
    double e = 0.0;
    for (int k = 1; k <= n_cells_; ++k)
      for (int j = 1; j <= n_cells_; ++j)
        for (int i = 1; i <= n_cells_; ++i) {
          const int c = cell_index(i, j, k);
          const int bx = cell_index(i - 1, j, k);
          const int by = cell_index(i, j - 1, k);
          const int bz = cell_index(i, j, k - 1);
          auto backdiff = [&](const double* f) {
            const double ddx = f[c] - f[bx];
            const double ddy = f[c] - f[by];
            const double ddz = f[c] - f[bz];
            return std::sqrt(ddx * ddx + ddy * ddy + ddz * ddz);
          };
          e = std::max(e, e_phi * backdiff(f_phi));
          e = std::max(e, e_u * backdiff(f_u));
          e = std::max(e, e_theta * backdiff(f_th));
        }
    if (e > eta)
      flags[id] = RefineFlag::refine;
    else if (e < 0.1 * eta)
      flags[id] = RefineFlag::derefine;
  }
  return flags;
}

void OctreeMesh::refine(int id) {
  if (!blocks_[id].alive() || !blocks_[id].is_leaf())
    throw config_error("refine: block is not a live leaf");
  if (blocks_[id].level >= max_depth_) throw config_error("refine: at max depth");
  refine_block(id, {});
}

void OctreeMesh::refine_block(int id, std::span<const Plane> planes) {
  Block& parent = blocks_[id];
  const int level = parent.level;
  for (int c = 0; c < 8; ++c) {
    const int child_id = allocate_block();
    Block& child = blocks_[child_id];
    child.level = level + 1;
    child.parent = id;
    child.sibling = c;
    child.ci = 2 * blocks_[id].ci + (c & 1);
    child.cj = 2 * blocks_[id].cj + ((c >> 1) & 1);
    child.ck = 2 * blocks_[id].ck + ((c >> 2) & 1);
    blocks_[id].children[c] = child_id;
    insert_into_maps(child_id);
  }
  for (Plane p : planes)
    for (Var v : {Var::phi, Var::u, Var::theta})
      for (int c = 0; c < 8; ++c) prolong_parent_into_child(id, c, v, p, p);
}

void OctreeMesh::derefine_block(int parent_id, std::span<const Plane> planes) {
  for (Plane p : planes)
    for (Var v : {Var::phi, Var::u, Var::theta})
      for (int c = 0; c < 8; ++c) restrict_child_into_parent(parent_id, c, v, p, p);
  Block& parent = blocks_[parent_id];
  for (int c = 0; c < 8; ++c) {
    const int child_id = parent.children[c];
    remove_from_maps(child_id);
    release_block(child_id);
    parent.children[c] = -1;
  }
}

bool OctreeMesh::derefine_allowed(int parent_id) const {
  const Block& p = blocks_[parent_id];
  const int blocks_per_axis = base_blocks_ << (p.level - 1);
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const int ti = p.ci + dx, tj = p.cj + dy, tk = p.ck + dz;
        if (ti < 0 || ti >= blocks_per_axis || tj < 0 || tj >= blocks_per_axis ||
            tk < 0 || tk >= blocks_per_axis)
          continue;
        const int nb_id = find_block(p.level, ti, tj, tk);
        if (nb_id < 0 || blocks_[nb_id].is_leaf()) continue;
        // Children of nb facing p must all be leaves, or coarsening p would
        // put leaves two levels apart next to it.
        const Block& nb = blocks_[nb_id];
        for (int c = 0; c < 8; ++c) {
          const int ox = c & 1, oy = (c >> 1) & 1, oz = (c >> 2) & 1;
          if (dx != 0 && ox != (dx > 0 ? 0 : 1)) continue;
          if (dy != 0 && oy != (dy > 0 ? 0 : 1)) continue;
          if (dz != 0 && oz != (dz > 0 ? 0 : 1)) continue;
          if (!blocks_[nb.children[c]].is_leaf()) return false;
        }
      }
  return true;
}

bool OctreeMesh::apply_flags(const std::vector<RefineFlag>& flags,
                             std::span<const Plane> planes) {
  // Collect the refinement set, rippling to coarser neighbors so the 2:1
  // rule survives.
  std::vector<char> want(blocks_.size(), 0);
  std::vector<int> work;
  for (int id = 0; id < int(blocks_.size()) && id < int(flags.size()); ++id) {
    const Block& b = blocks_[id];
    if (!b.alive() || !b.is_leaf()) continue;
    if (flags[id] == RefineFlag::refine && b.level < max_depth_) {
      want[id] = 1;
      work.push_back(id);
    }
  }
  while (!work.empty()) {
    const int id = work.back();
    work.pop_back();
    const Block& b = blocks_[id];
    const int blocks_per_axis = base_blocks_ << (b.level - 1);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const int ti = b.ci + dx, tj = b.cj + dy, tk = b.ck + dz;
          if (ti < 0 || ti >= blocks_per_axis || tj < 0 || tj >= blocks_per_axis ||
              tk < 0 || tk >= blocks_per_axis)
            continue;
          if (find_block(b.level, ti, tj, tk) >= 0) continue;
          const int coarse = find_block(b.level - 1, ti >> 1, tj >> 1, tk >> 1);
          if (coarse >= 0 && !want[coarse]) {
            want[coarse] = 1;
            work.push_back(coarse);
          }
        }
  }

  std::vector<int> to_refine;
  for (int id = 0; id < int(want.size()); ++id)
    if (want[id]) to_refine.push_back(id);
  std::sort(to_refine.begin(), to_refine.end(), [this](int a, int c) {
    const Block& ba = blocks_[a];
    const Block& bc = blocks_[c];
    if (ba.level != bc.level) return ba.level < bc.level;
    return z_key(ba.ci, ba.cj, ba.ck) < z_key(bc.ci, bc.cj, bc.ck);
  });

  bool changed = false;
  if (!to_refine.empty()) {
    // One guard fill per plane: prolongation into new children reads parent
    // guards, and refining never disturbs existing interiors.
    for (Plane p : planes)
      for (Var v : {Var::phi, Var::u, Var::theta}) fill_guards(v, p);
    for (int id : to_refine) refine_block(id, planes);
    changed = true;
  }

  // Derefinement: all eight siblings must agree and balance must survive.
  std::vector<int> candidates;
  for (int id = 0; id < int(blocks_.size()) && id < int(flags.size()); ++id) {
    const Block& b = blocks_[id];
    if (!b.alive() || !b.is_leaf() || b.parent < 0) continue;
    if (b.sibling != 0) continue;  // visit each sibling set once
    const Block& parent = blocks_[b.parent];
    bool all = true;
    for (int c = 0; c < 8 && all; ++c) {
      const int cid = parent.children[c];
      all = cid < int(flags.size()) && blocks_[cid].is_leaf() &&
            flags[cid] == RefineFlag::derefine;
    }
    if (all) candidates.push_back(b.parent);
  }
  std::sort(candidates.begin(), candidates.end(), [this](int a, int c) {
    return z_key(blocks_[a].ci, blocks_[a].cj, blocks_[a].ck) <
           z_key(blocks_[c].ci, blocks_[c].cj, blocks_[c].ck);
  });
  for (int pid : candidates) {
    if (!derefine_allowed(pid)) continue;
    derefine_block(pid, planes);
    changed = true;
  }
  return changed;
}

// ---------------------------------------------------------------------------
// Orderings
// ---------------------------------------------------------------------------

std::vector<int> OctreeMesh::morton_order() const {
  std::vector<int> roots = level_ids_[1];
  std::sort(roots.begin(), roots.end(), [this](int a, int b) {
    return z_key(blocks_[a].ci, blocks_[a].cj, blocks_[a].ck) <
           z_key(blocks_[b].ci, blocks_[b].cj, blocks_[b].ck);
  });
  std::vector<int> order;
  std::vector<int> stack;
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.push_back(*it);
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const Block& b = blocks_[id];
    if (!b.is_leaf())
      for (int c = 7; c >= 0; --c) stack.push_back(b.children[c]);
  }
  return order;
}

std::vector<int> OctreeMesh::morton_level_order() const {
  const std::vector<int> morton = morton_order();
  std::vector<int> out;
  out.reserve(morton.size());
  for (int level = 1; level <= num_levels(); ++level)
    for (int id : morton)
      if (blocks_[id].level == level) out.push_back(id);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> partition_slices(std::size_t count,
                                                                  int workers) {
  std::vector<std::pair<std::size_t, std::size_t>> slices;
  if (workers < 1) throw config_error("worker count must be >= 1");
  const std::size_t base = count / std::size_t(workers);
  const std::size_t extra = count % std::size_t(workers);
  std::size_t begin = 0;
  for (int w = 0; w < workers; ++w) {
    const std::size_t len = base + (std::size_t(w) < extra ? 1 : 0);
    slices.emplace_back(begin, begin + len);
    begin += len;
  }
  return slices;
}

std::vector<int> partition(const OctreeMesh& mesh, const std::vector<int>& level_order,
                           int workers) {
  std::vector<int> owner(level_order.size(), 0);
  std::size_t pos = 0;
  for (int level = 1; level <= mesh.num_levels(); ++level) {
    std::size_t count = 0;
    while (pos + count < level_order.size() &&
           mesh.block(level_order[pos + count]).level == level)
      ++count;
    const auto slices = partition_slices(count, workers);
    for (int w = 0; w < workers; ++w)
      for (std::size_t i = slices[w].first; i < slices[w].second; ++i)
        owner[pos + i] = w;
    pos += count;
  }
  return owner;
}

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

void OctreeMesh::check_invariants() const {
  auto fail = [](const std::string& msg) { throw numeric_error("mesh invariant: " + msg); };

  std::uint64_t finest_units = 0;  // leaf volume in finest-possible cell units
  const int deepest = num_levels();
  for (int id = 0; id < int(blocks_.size()); ++id) {
    const Block& b = blocks_[id];
    if (!b.alive()) continue;
    const int blocks_per_axis = base_blocks_ << (b.level - 1);
    if (b.ci < 0 || b.ci >= blocks_per_axis || b.cj < 0 || b.cj >= blocks_per_axis ||
        b.ck < 0 || b.ck >= blocks_per_axis)
      fail("block coordinates out of range");
    bool any = false, all = true;
    for (int c = 0; c < 8; ++c) {
      any |= b.children[c] >= 0;
      all &= b.children[c] >= 0;
    }
    if (any != all) fail("children must be all set or all null");
    if (b.parent >= 0) {
      const Block& parent = blocks_[b.parent];
      if (parent.children[b.sibling] != id) fail("sibling/parent link broken");
      if (b.ci != 2 * parent.ci + (b.sibling & 1) ||
          b.cj != 2 * parent.cj + ((b.sibling >> 1) & 1) ||
          b.ck != 2 * parent.ck + ((b.sibling >> 2) & 1))
        fail("child placement offsets broken");
    } else if (b.level != 1) {
      fail("non-root block without parent");
    }
    if (find_block(b.level, b.ci, b.cj, b.ck) != id) fail("coordinate map inconsistent");
    if (b.is_leaf()) {
      const int shift = 3 * (deepest - b.level);
      finest_units += std::uint64_t(1) << shift;
      // 2:1 balance against every face/edge/corner neighbor region.
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const int ti = b.ci + dx, tj = b.cj + dy, tk = b.ck + dz;
            if (ti < 0 || ti >= blocks_per_axis || tj < 0 || tj >= blocks_per_axis ||
                tk < 0 || tk >= blocks_per_axis)
              continue;
            const int same = find_block(b.level, ti, tj, tk);
            if (same < 0) {
              const int coarse = find_block(b.level - 1, ti >> 1, tj >> 1, tk >> 1);
              if (coarse < 0) fail("leaf has neighbor more than one level coarser");
              if (!blocks_[coarse].is_leaf()) fail("coordinate maps out of sync");
              continue;
            }
            const Block& nb = blocks_[same];
            if (nb.is_leaf()) continue;
            for (int c = 0; c < 8; ++c) {
              const int ox = c & 1, oy = (c >> 1) & 1, oz = (c >> 2) & 1;
              if (dx != 0 && ox != (dx > 0 ? 0 : 1)) continue;
              if (dy != 0 && oy != (dy > 0 ? 0 : 1)) continue;
              if (dz != 0 && oz != (dz > 0 ? 0 : 1)) continue;
              if (!blocks_[nb.children[c]].is_leaf())
                fail("leaf has neighbor more than one level finer");
            }
          }
    }
  }
  const std::uint64_t roots = std::uint64_t(base_blocks_) * base_blocks_ * base_blocks_;
  if (finest_units != roots * (std::uint64_t(1) << (3 * (deepest - 1))))
    fail("leaves do not tile the domain exactly once");
}

}  // namespace pfs
