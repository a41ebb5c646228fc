#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgg {

// Base of every error raised by the library. kind() is a stable identifier
// that the CLI reports in its machine-readable error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SGG_DEFINE_ERROR(Name)                                     \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

SGG_DEFINE_ERROR(ShapeMismatch);
SGG_DEFINE_ERROR(SizeMismatch);
SGG_DEFINE_ERROR(EmptyInput);
SGG_DEFINE_ERROR(InvalidSlope);
SGG_DEFINE_ERROR(IndexOutOfRange);
SGG_DEFINE_ERROR(NotADistribution);
SGG_DEFINE_ERROR(NonScalarLoss);
SGG_DEFINE_ERROR(TapeConsumed);
SGG_DEFINE_ERROR(InvalidConfig);
SGG_DEFINE_ERROR(EmptyScene);
SGG_DEFINE_ERROR(IncompatibleCheckpoint);
SGG_DEFINE_ERROR(NonFiniteLoss);
SGG_DEFINE_ERROR(IoError);

#undef SGG_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& instance_id, const std::string& reason);
  const std::string& instance_id() const noexcept { return instance_id_; }

 private:
  std::string instance_id_;
};

}  // namespace sgg
