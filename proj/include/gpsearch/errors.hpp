#pragma once

#include <stdexcept>
#include <string>

namespace gpsearch {

/// Invalid configuration, malformed input data, or violated precondition.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky factorization failed; carries the jitter that was in effect.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, double attempted_jitter)
      : std::runtime_error(what), attempted_jitter_(attempted_jitter) {}

  double attempted_jitter() const noexcept { return attempted_jitter_; }

 private:
  double attempted_jitter_;
};

}  // namespace gpsearch
