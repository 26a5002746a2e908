#pragma once

#include <stdexcept>
#include <string>

namespace signorini {

enum class ErrorCode {
  Ok = 0,
  InvalidArgument = 1,
  Precondition = 2,
  Numerical = 3,
  NotConverged = 4,
  Io = 5,
  Config = 6,
  Internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& msg) { throw Error(c, msg); }

inline void require(bool ok, ErrorCode c, const std::string& msg) {
  if (!ok) fail(c, msg);
}

}  // namespace signorini
