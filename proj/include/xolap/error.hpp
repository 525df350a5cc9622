#pragma once

#include <stdexcept>
#include <string>

namespace xolap {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind {
  Usage,       ///< bad request / missing argument
  Parse,       ///< malformed XML or pattern text
  Validation,  ///< document parsed but violates the multidimensional rules
  Operator,    ///< operator precondition failed
  Construction ///< invalid tree construction (e.g. empty tag)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Stable machine-readable code, e.g. "measure-not-last".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

}  // namespace xolap
