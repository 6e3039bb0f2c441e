#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace grazing {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An operation received an input it cannot handle, such as a zero vector.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or an iterative solver failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Expected events per step exceed the configured cap.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// A time step produced non-finite velocities.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, std::vector<std::size_t> indices)
      : Error(what), indices_(std::move(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

}  // namespace grazing
