#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace illab {

// All library failures carry a short machine-readable code ("grid-mismatch",
// "not-in-range", ...) next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace illab
