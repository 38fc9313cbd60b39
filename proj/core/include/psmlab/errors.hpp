#pragma once

#include <stdexcept>
#include <string>

namespace psmlab {

// Root of the psmlab error hierarchy. kind() returns a stable tag used by
// the simulation harness when counting per-replicate failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define PSMLAB_ERROR_TYPE(Name)                                    \
  class Name : public Error {                                      \
   public:                                                         \
    using Error::Error;                                            \
    const char* kind() const noexcept override { return #Name; }   \
  }

PSMLAB_ERROR_TYPE(SingularMatrix);
PSMLAB_ERROR_TYPE(InsufficientRows);
PSMLAB_ERROR_TYPE(ZeroVector);
PSMLAB_ERROR_TYPE(RejectionLimitExceeded);
PSMLAB_ERROR_TYPE(DegenerateTreatment);
PSMLAB_ERROR_TYPE(SeparationDetected);
PSMLAB_ERROR_TYPE(OneClassOnly);
PSMLAB_ERROR_TYPE(NoPairsFormed);
PSMLAB_ERROR_TYPE(RankDeficient);
PSMLAB_ERROR_TYPE(TooFewPairs);
PSMLAB_ERROR_TYPE(ParseError);
PSMLAB_ERROR_TYPE(ConfigInvalid);
PSMLAB_ERROR_TYPE(IoError);

#undef PSMLAB_ERROR_TYPE

}  // namespace psmlab
