#ifndef PFS_CORE_ERRORS_HPP
#define PFS_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pfs {

// Bad run configuration or invalid parameter combinations.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values, nonpositive relaxation time, and similar breakdowns.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// The nonlinear solve could not be rescued by time step reduction.
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pfs

#endif
