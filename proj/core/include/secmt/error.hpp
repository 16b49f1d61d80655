#pragma once

#include <stdexcept>
#include <string>

namespace secmt {

// Error categories; each maps onto one CLI exit status.
enum class ErrorKind {
  config,     // invalid configuration or precondition on parameters
  data,       // malformed or inconsistent input data
  input,      // out-of-range argument to an operation
  invariant,  // internal contract violation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

const char* to_string(ErrorKind kind) noexcept;

// 0 is success; 2 config, 3 data/input, 4 internal invariant.
int exit_code(ErrorKind kind) noexcept;

}  // namespace secmt
