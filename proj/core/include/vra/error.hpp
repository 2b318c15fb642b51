#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vra {

/// Base class for every error raised by the toolkit. `code()` is a stable
/// machine-readable tag that the CLI reports alongside the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error("parse_error", source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error("parse_error", what) {}

  /// 1-based line number; 0 when not applicable.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

#define VRA_DEFINE_ERROR(Name, tag)                               \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(tag, what) {}  \
  };

VRA_DEFINE_ERROR(FormatError, "format_error")
VRA_DEFINE_ERROR(ValidationError, "validation_error")
VRA_DEFINE_ERROR(DuplicateError, "duplicate_error")
VRA_DEFINE_ERROR(SchemaError, "schema_error")
VRA_DEFINE_ERROR(JoinError, "join_error")
VRA_DEFINE_ERROR(ShapeError, "shape_error")
VRA_DEFINE_ERROR(DegenerateError, "degenerate_distribution")
VRA_DEFINE_ERROR(KernelError, "kernel_error")
VRA_DEFINE_ERROR(UndefinedMetricError, "undefined_metric")
VRA_DEFINE_ERROR(MediaError, "media_error")
VRA_DEFINE_ERROR(ConfigError, "config_error")
VRA_DEFINE_ERROR(IoError, "io_error")

#undef VRA_DEFINE_ERROR

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double final_violation)
      : Error("convergence_error", what), violation_(final_violation) {}

  double final_violation() const noexcept { return violation_; }

 private:
  double violation_;
};

}  // namespace vra
