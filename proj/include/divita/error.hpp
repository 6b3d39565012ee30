#pragma once

#include <stdexcept>
#include <string>

namespace divita {

enum class ErrorKind {
  parse,
  validation,
  argument,
  dimension,
  configuration,
  format,
  length,
  io,
  data,
  numeric,
  undefined_result,
};

const char* to_string(ErrorKind kind);

// Process exit code for a failure of this kind: 1 validation, 2 I/O, 3 numeric.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace divita

#include <functional>

namespace divita {

// Non-fatal diagnostics. The default sink writes "warning: ..." to stderr.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace divita
