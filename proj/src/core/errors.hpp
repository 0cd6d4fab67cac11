#pragma once

#include <stdexcept>
#include <string>

namespace oodcl {

// Base class for all library errors. Each condition gets its own type so
// callers (and the C API) can map failures without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define OODCL_ERROR_TYPE(NAME)        \
  class NAME : public Error {         \
   public:                            \
    using Error::Error;               \
  }

OODCL_ERROR_TYPE(ZeroVectorError);
OODCL_ERROR_TYPE(DimensionMismatchError);
OODCL_ERROR_TYPE(EmptyInputError);
OODCL_ERROR_TYPE(NoPositivePairsError);
OODCL_ERROR_TYPE(UnknownClassError);
OODCL_ERROR_TYPE(SingleClassBatchError);
OODCL_ERROR_TYPE(MissingInputError);
OODCL_ERROR_TYPE(MissingOodError);
OODCL_ERROR_TYPE(NonFiniteLossError);
OODCL_ERROR_TYPE(NonPositiveScaleError);
OODCL_ERROR_TYPE(PlacementFailureError);
OODCL_ERROR_TYPE(IoError);
OODCL_ERROR_TYPE(ParseError);
OODCL_ERROR_TYPE(ConfigError);

#undef OODCL_ERROR_TYPE

}  // namespace oodcl
