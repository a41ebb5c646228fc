#include "sgg/error.hpp"

namespace sgg {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error("ParseError", "line " + std::to_string(line) + ": " + message), line_(line) {}

ValidationError::ValidationError(const std::string& instance_id, const std::string& reason)
    : Error("ValidationError", "instance '" + instance_id + "': " + reason),
      instance_id_(instance_id) {}

}  // namespace sgg
