#pragma once

#include <stdexcept>
#include <string>

namespace xcf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularTensor : Error {
  using Error::Error;
};

struct NonPositiveMetric : Error {
  using Error::Error;
};

struct JacobiViolation : Error {
  using Error::Error;
};

struct MixedCurvatureSign : Error {
  using Error::Error;
};

struct StepProducedInvalidMetric : Error {
  using Error::Error;
};

// Raised when a functional is evaluated outside its domain,
// e.g. (det P)^eta with non-integer eta and det P <= 0.
struct DomainError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

}  // namespace xcf
