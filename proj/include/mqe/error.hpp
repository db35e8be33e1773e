#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mqe {

enum class ErrorKind {
  io,
  parse,
  dimension_mismatch,
  invalid_argument,
  support_too_small,
  duplicate_centers,
  singular,
  solver,
};

std::string_view to_string(ErrorKind kind);

/// Library error carrying a machine-readable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace mqe
