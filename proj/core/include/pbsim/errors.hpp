#pragma once

#include <stdexcept>
#include <string>

namespace pbsim {

// Bad user input: malformed config files, invalid parameter combinations,
// unusable command lines. The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime: NaN/Inf in a propagating state, a solver
// that ran out of iterations, an unstable step. The CLI maps this to exit
// code 3.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pbsim
