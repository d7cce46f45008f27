#pragma once

#include <stdexcept>
#include <string>

namespace roughtomo {

// Exit codes used by the CLI. 0 means success.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kValidationError = 2,
  kAccuracyError = 3,
  kCoverageError = 4,
  kGenericityError = 5,
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric accuracy certificate failed (table build, quadrature, ...).
struct AccuracyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sampling lattice does not cover the data support with required padding.
struct GridCoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No candidate evaluation point passed Diophantine/geometric screening.
struct GenericityFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Curve coordinates undefined (point at curvature center).
struct CoordinateFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Continued fraction terminated: input rational at working precision.
struct RationalInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return kValidationError;
  if (dynamic_cast<const AccuracyFailure*>(&e)) return kAccuracyError;
  if (dynamic_cast<const QuadratureFailure*>(&e)) return kAccuracyError;
  if (dynamic_cast<const GridCoverageError*>(&e)) return kCoverageError;
  if (dynamic_cast<const CoordinateFailure*>(&e)) return kCoverageError;
  if (dynamic_cast<const GenericityFailure*>(&e)) return kGenericityError;
  if (dynamic_cast<const RationalInput*>(&e)) return kGenericityError;
  return kUsageError;
}

}  // namespace roughtomo
