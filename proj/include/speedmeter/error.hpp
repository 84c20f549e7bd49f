#pragma once

#include <stdexcept>
#include <string>

namespace speedmeter {

enum class ErrorCode {
  invalid_argument = 1,
  parse = 2,
  io = 3,
  numeric = 4,
};

// Base exception for the library; the C API maps `code()` onto status values.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline Error invalid_argument(const std::string& what) {
  return Error(ErrorCode::invalid_argument, what);
}

}  // namespace speedmeter
