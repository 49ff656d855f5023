#pragma once

#include <stdexcept>
#include <string>

namespace breather {

/// Precondition or domain violation on user-supplied arguments.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical kernel failed (factorization breakdown, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}
}  // namespace detail

}  // namespace breather
