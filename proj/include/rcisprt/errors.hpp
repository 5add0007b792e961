#ifndef RCISPRT_ERRORS_HPP
#define RCISPRT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rcisprt {

/// Invalid user-supplied configuration (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative numerical procedure failed to produce a valid result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcisprt

#endif  // RCISPRT_ERRORS_HPP
