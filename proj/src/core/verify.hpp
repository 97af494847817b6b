#ifndef PFS_CORE_VERIFY_HPP
#define PFS_CORE_VERIFY_HPP

#include <ostream>
#include <string>

namespace pfs {

// Built-in oracle suites, runnable without a test framework:
//   gij    - anisotropy gradient/Hessian closed forms vs finite differences
//   morton - orderings vs a brute-force reimplementation on random trees
//   tip    - tip radius extractor on analytic spheres
//   bdf2   - coefficients and measured order on y' = -y
// suite may be one of the names or empty for all. Prints one line per check
// and returns the number of failures.
int run_verify(const std::string& suite, std::ostream& out);

}  // namespace pfs

#endif
