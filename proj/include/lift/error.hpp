#pragma once

#include <stdexcept>
#include <string>

namespace lift {

/// Library-level failure. `code` is a stable dotted identifier such as
/// "dataset.malformed_line" that the CLI surfaces in its error object.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace lift
