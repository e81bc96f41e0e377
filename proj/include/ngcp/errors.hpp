#pragma once

#include <stdexcept>
#include <string>

namespace ngcp {

/// Base of every domain error raised by the library. `kind()` is the stable
/// error name (e.g. "DuplicateSfError") used in CLI output and tests.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define NGCP_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

// catalog
NGCP_DEFINE_ERROR(SchemaError);
NGCP_DEFINE_ERROR(DuplicateSfError);
NGCP_DEFINE_ERROR(MissingAttributeError);
NGCP_DEFINE_ERROR(InfeasibleGroupingError);
NGCP_DEFINE_ERROR(UnassignedSfError);

// messages / fabric
NGCP_DEFINE_ERROR(NoInterfaceError);
NGCP_DEFINE_ERROR(BadRelayError);
NGCP_DEFINE_ERROR(UnknownDestinationError);
NGCP_DEFINE_ERROR(ModelMismatchError);

// blocks
NGCP_DEFINE_ERROR(PermissionDenied);
NGCP_DEFINE_ERROR(UnknownDevice);
NGCP_DEFINE_ERROR(NoDPlaneFunctionError);
NGCP_DEFINE_ERROR(NoEligibleSliceError);
NGCP_DEFINE_ERROR(NoSessionError);
NGCP_DEFINE_ERROR(PolicyForbidsError);
NGCP_DEFINE_ERROR(NotIdleError);
NGCP_DEFINE_ERROR(NoContextError);
NGCP_DEFINE_ERROR(NoPathError);
NGCP_DEFINE_ERROR(CapacityError);
NGCP_DEFINE_ERROR(AdaptorError);

// slices / netsim / engine
NGCP_DEFINE_ERROR(InfraCapacityError);
NGCP_DEFINE_ERROR(LifecycleOrderError);
NGCP_DEFINE_ERROR(IllegalEventError);
NGCP_DEFINE_ERROR(ScenarioError);
NGCP_DEFINE_ERROR(EquivalenceViolation);

#undef NGCP_DEFINE_ERROR

}  // namespace ngcp
