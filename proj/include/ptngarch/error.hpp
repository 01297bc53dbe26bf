#pragma once

#include <stdexcept>
#include <string>

namespace ptngarch {

/// Bad input: malformed files, violated preconditions, unknown options.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation that could not be completed: singular information matrix,
/// exploding intensities, non-finite likelihood.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ptngarch
