#include "ncs/error.hpp"

namespace ncs {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

}  // namespace ncs
