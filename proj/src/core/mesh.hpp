#ifndef PFS_CORE_MESH_HPP
#define PFS_CORE_MESH_HPP

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "core/errors.hpp"
#include "core/geometry.hpp"

namespace pfs {

enum class Var : int { phi = 0, u = 1, theta = 2 };
constexpr int kNumVars = 3;

// Storage planes per variable inside every block. cur/old/old2 are the BDF2
// time levels, star is r2 old - r3 old2, rhs is the FAS modified right-hand
// side (identically zero on leaves), saved holds the iterate snapshot used to
// form coarse-grid corrections, scratch is the sweep/defect workspace.
enum class Plane : int { cur = 0, old = 1, old2 = 2, star = 3, rhs = 4, saved = 5, scratch = 6 };
constexpr int kNumPlanes = 7;

enum class RefineFlag : int { derefine = 0, keep = 1, refine = 2 };

// One N^3 cell patch with a single guard layer. Tree links use block ids
// into OctreeMesh::blocks; -1 means none. Integer block coordinates (ci, cj,
// ck) count blocks from the domain corner at this block's level, which makes
// every transfer-operator index computation exact.
struct Block {
  int level = 0;  // 1-based; 0 marks a freed slot
  int parent = -1;
  int sibling = 0;  // octant within parent: bit 0 = x, bit 1 = y, bit 2 = z
  std::array<int, 8> children{-1, -1, -1, -1, -1, -1, -1, -1};
  int ci = 0, cj = 0, ck = 0;
  std::vector<double> data;

  bool is_leaf() const { return children[0] < 0; }
  bool alive() const { return level > 0; }
};

// Block-structured octree mesh over the cube [0, L]^3. Level 1 is the
// uniform base_blocks^3 root layer; each deeper level halves the cell
// spacing. Any two face/edge/corner adjacent leaves differ by at most one
// level, and leaves tile the domain exactly once.
class OctreeMesh {
 public:
  OctreeMesh(double domain_size, int base_blocks, int n_cells, int max_depth);

  // --- geometry ---
  int n_cells() const { return n_cells_; }
  int side() const { return n_cells_ + 2; }
  int cells_per_block() const { return n_cells_ * n_cells_ * n_cells_; }
  double domain_size() const { return domain_size_; }
  int base_blocks() const { return base_blocks_; }
  int max_depth() const { return max_depth_; }
  void set_max_depth(int depth);
  double level_dx(int level) const;
  double block_edge(int level) const { return n_cells_ * level_dx(level); }
  Vec3 block_origin(const Block& b) const;
  // Cell centers for local index i in [0, side): interior cells are 1..N.
  Vec3 cell_center(const Block& b, int i, int j, int k) const;

  // --- access ---
  Block& block(int id) { return blocks_[id]; }
  const Block& block(int id) const { return blocks_[id]; }
  std::size_t slot_count() const { return blocks_.size(); }
  int num_levels() const;  // deepest level with blocks
  const std::vector<int>& level_ids(int level) const;
  std::vector<int> leaf_ids() const;
  std::uint64_t leaf_cell_count() const;
  int find_block(int level, int ci, int cj, int ck) const;  // -1 when absent

  double* plane(int id, Var v, Plane p) {
    return blocks_[id].data.data() + plane_offset(v, p);
  }
  const double* plane(int id, Var v, Plane p) const {
    return blocks_[id].data.data() + plane_offset(v, p);
  }
  int cell_index(int i, int j, int k) const { return (k * side() + j) * side() + i; }
  std::size_t plane_size() const { return std::size_t(side()) * side() * side(); }

  // --- guard cells and inter-level transfer ---
  // Restrict leaf data upward so every covered block holds the 8-cell
  // average of its children (recursively, so ultimately of its leaves).
  void sync_covered(Var v, Plane p);
  // Fill one block's guard layer from current same-level interiors,
  // prolonged coarse neighbors, or domain mirrors. Writes only this block's
  // guards, so disjoint blocks can be filled concurrently.
  void fill_block_guards(int id, Var v, Plane p);
  // Fill guard layers on every block of one level. Levels must be filled
  // coarse-to-fine for the prolongation sources to be valid.
  void fill_level_guards(int level, Var v, Plane p);
  // sync_covered + fill_level_guards for levels 1..deepest.
  void fill_guards(Var v, Plane p);

  // Restrict one child's interior into the parent's covered octant.
  void restrict_child_into_parent(int parent_id, int child_octant, Var v, Plane src,
                                  Plane dst);
  // Prolong the parent's data (interior + guards) into one child's interior.
  // When additive is true the trilinear value is added instead of assigned
  // (used for coarse-grid corrections).
  void prolong_parent_into_child(int parent_id, int child_octant, Var v, Plane src,
                                 Plane dst, bool additive = false);

  // --- adaptivity ---
  // Per-block refinement flags from the weighted backward-difference
  // criterion: refine above eta, derefine below 0.1 eta. Guard cells of the
  // inspected plane must be current. Non-leaf blocks get keep.
  std::vector<RefineFlag> flag_refinement(double e_phi, double e_u, double e_theta,
                                          double eta, Plane p) const;
  // Split one leaf into its eight children without touching field data
  // (tree reconstruction on checkpoint load).
  void refine(int id);
  // Refine/derefine per flags: refinement ripples to preserve 2:1 balance,
  // derefinement is silently denied where siblings disagree or balance would
  // break. The listed planes are prolonged into new children / restricted
  // into re-leafed parents. Returns true when the mesh changed.
  bool apply_flags(const std::vector<RefineFlag>& flags, std::span<const Plane> planes);

  // --- orderings ---
  // Depth-first pre-order: each root followed by its subtree, children in
  // octant order. Roots ordered by bit interleave of their coordinates.
  std::vector<int> morton_order() const;
  // The same traversal grouped by level: all level-1 blocks in Morton order,
  // then all level-2 blocks, and so on.
  std::vector<int> morton_level_order() const;

  void check_invariants() const;  // throws on any violated structure rule

 private:
  std::size_t plane_offset(Var v, Plane p) const {
    return (std::size_t(static_cast<int>(v)) * kNumPlanes + static_cast<int>(p)) *
           plane_size();
  }
  int allocate_block();
  void release_block(int id);
  void insert_into_maps(int id);
  void remove_from_maps(int id);
  void refine_block(int id, std::span<const Plane> planes);
  void derefine_block(int parent_id, std::span<const Plane> planes);
  bool derefine_allowed(int parent_id) const;
  // Neighbor block of b in direction d (each component -1/0/1), resolved at
  // b's level after domain mirroring. Returns {id, flip mask} where id == -1
  // means the region is only covered one level coarser.
  struct NeighborRef {
    int id = -1;
    int coarse_id = -1;
    std::array<bool, 3> flip{false, false, false};
  };
  NeighborRef resolve_neighbor(const Block& b, const std::array<int, 3>& d) const;

  double domain_size_;
  int base_blocks_;
  int n_cells_;
  int max_depth_;
  std::vector<Block> blocks_;
  std::vector<int> free_slots_;
  std::vector<std::vector<int>> level_ids_;                   // [level]
  std::vector<std::unordered_map<std::uint64_t, int>> maps_;  // coord -> id per level
};

// Contiguous slice bounds dividing `count` items among `workers`, sizes
// differing by at most one (larger slices first).
std::vector<std::pair<std::size_t, std::size_t>> partition_slices(std::size_t count,
                                                                  int workers);

// Worker assignment for every position of a Morton-Level ordering: each
// level's contiguous segment is split independently, so per-level imbalance
// is at most one block.
std::vector<int> partition(const OctreeMesh& mesh, const std::vector<int>& level_order,
                           int workers);

}  // namespace pfs

#endif
