#pragma once

#include <stdexcept>
#include <string>

namespace fptx {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition (shape mismatch, bad parameter).
struct PreconditionError : Error {
  using Error::Error;
};

// Operation outside the mathematical domain (division by zero, sqrt of a
// negative, exp overflow).
struct DomainError : Error {
  using Error::Error;
};

// Input for which the requested quantity is undefined (constant vector into
// layer norm, zero vector into RMS norm, zero reference in a normwise distance).
struct DegenerateInputError : Error {
  using Error::Error;
};

// A matrix that must be nonsingular is numerically singular.
struct SingularityError : Error {
  using Error::Error;
};

// Requested variant is not supported (for example an induced norm that is
// NP-hard to evaluate).
struct CapabilityError : Error {
  using Error::Error;
};

// Finite differences straddled a non-differentiable point; retry with a
// smaller step or a different sample.
struct KinkCrossingError : Error {
  using Error::Error;
};

}  // namespace fptx
