#ifndef PFS_CORE_GEOMETRY_HPP
#define PFS_CORE_GEOMETRY_HPP

#include <array>
#include <cmath>

namespace pfs {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm2(const Vec3& a) { return dot(a, a); }

// Symmetric 3x3 matrix, unique entries only.
struct Sym3 {
  double xx = 0, yy = 0, zz = 0, xy = 0, yz = 0, xz = 0;

  double trace() const { return xx + yy + zz; }

  // Full contraction with another symmetric matrix, sum_ij a_ij b_ij.
  double contract(const Sym3& o) const {
    return xx * o.xx + yy * o.yy + zz * o.zz + 2.0 * (xy * o.xy + yz * o.yz + xz * o.xz);
  }

  double operator()(int i, int j) const {
    if (i == j) return i == 0 ? xx : (i == 1 ? yy : zz);
    int s = i + j;  // 1 -> xy, 3 -> yz, 2 -> xz
    return s == 1 ? xy : (s == 3 ? yz : xz);
  }
};

inline Sym3 identity3() { return Sym3{1.0, 1.0, 1.0, 0.0, 0.0, 0.0}; }

}  // namespace pfs

#endif
