#pragma once

#include <stdexcept>
#include <string>

namespace magscatter {

// Base class for all failures raised by the library. The CLI maps these to
// exit code 3 (numerical/domain errors); ConfigError maps to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define MAGSCATTER_DEFINE_ERROR(Name)                      \
  class Name : public Error {                              \
   public:                                                 \
    explicit Name(const std::string& msg) : Error(#Name, msg) {} \
  }

MAGSCATTER_DEFINE_ERROR(GridMismatchError);
MAGSCATTER_DEFINE_ERROR(NonZeroMeanError);
MAGSCATTER_DEFINE_ERROR(WraparoundError);
MAGSCATTER_DEFINE_ERROR(ZeroTimeError);
MAGSCATTER_DEFINE_ERROR(StabilityError);
MAGSCATTER_DEFINE_ERROR(AnalyticVariantRequiredError);
MAGSCATTER_DEFINE_ERROR(MeshMismatchError);
MAGSCATTER_DEFINE_ERROR(NonConvergenceError);
MAGSCATTER_DEFINE_ERROR(InsufficientSamplesError);
MAGSCATTER_DEFINE_ERROR(NonPositiveValueError);
MAGSCATTER_DEFINE_ERROR(ExponentRelationError);
MAGSCATTER_DEFINE_ERROR(ConfigError);
MAGSCATTER_DEFINE_ERROR(IoError);

#undef MAGSCATTER_DEFINE_ERROR

}  // namespace magscatter
