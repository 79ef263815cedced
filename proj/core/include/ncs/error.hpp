#pragma once

#include <stdexcept>
#include <string>

namespace ncs {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message);
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define NCS_DECLARE_ERROR(Name)                                              \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

NCS_DECLARE_ERROR(OutsideBox);
NCS_DECLARE_ERROR(IntegrationDiverged);
NCS_DECLARE_ERROR(CapacityExceeded);
NCS_DECLARE_ERROR(DegenerateAxis);
NCS_DECLARE_ERROR(PolicyExhausted);
NCS_DECLARE_ERROR(OutputClash);
NCS_DECLARE_ERROR(RelationFlavorMismatch);
NCS_DECLARE_ERROR(EmptyController);
NCS_DECLARE_ERROR(ParameterViolation);
NCS_DECLARE_ERROR(BlockingController);
NCS_DECLARE_ERROR(OutsideDomain);
NCS_DECLARE_ERROR(LeftStateSpace);
NCS_DECLARE_ERROR(ConfigError);
NCS_DECLARE_ERROR(InvalidArgument);
NCS_DECLARE_ERROR(FormatError);

#undef NCS_DECLARE_ERROR

}  // namespace ncs
