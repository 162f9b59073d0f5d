#pragma once

#include <stdexcept>
#include <string>

namespace pnm {

enum class ErrorCode {
  InvalidParameter,
  InvalidInput,
  OutOfRange,
  Configuration,
  Assembly,
  Solver,
  UnsupportedTopology,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pnm
