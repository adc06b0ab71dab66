#pragma once

#include <stdexcept>
#include <string>

namespace symplane {

// Base for every error raised by the library. Subclasses mirror the failure
// classes of each pipeline stage so callers (mainly the CLI) can map them to
// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SYMPLANE_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

SYMPLANE_DEFINE_ERROR(ParseError)
SYMPLANE_DEFINE_ERROR(EmptyMesh)
SYMPLANE_DEFINE_ERROR(DegenerateMesh)
SYMPLANE_DEFINE_ERROR(FormatError)
SYMPLANE_DEFINE_ERROR(ChecksumError)
SYMPLANE_DEFINE_ERROR(DimensionMismatch)
SYMPLANE_DEFINE_ERROR(PairingError)
SYMPLANE_DEFINE_ERROR(TooFewPoints)
SYMPLANE_DEFINE_ERROR(EmptySet)
SYMPLANE_DEFINE_ERROR(InvalidArgument)

#undef SYMPLANE_DEFINE_ERROR

} // namespace symplane
