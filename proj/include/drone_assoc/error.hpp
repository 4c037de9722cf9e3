#pragma once

#include <stdexcept>
#include <string>

namespace drone_assoc {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, inconsistent configuration, out-of-order frames.
// The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A zero-norm (or non-finite) appearance vector that cannot be normalized.
class EmbeddingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Affine transform whose linear part is (numerically) singular.
class DegenerateTransformError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// estimate_affine could not produce a transform; callers fall back to identity.
class AffineEstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace drone_assoc
