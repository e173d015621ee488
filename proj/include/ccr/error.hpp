#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ccr {

// Runtime error carrying a stable machine-readable class tag, e.g. "gap-violation".
// The CLI prints the tag as a single parseable line; tests match on it.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

}  // namespace ccr
