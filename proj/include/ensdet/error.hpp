#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ensdet {

// Broad failure classes. The CLI maps each one to a distinct exit status.
enum class ErrorKind {
  invalid_argument,  // bad call or bad flag combination
  validation,        // input data violates a documented invariant
  data_mismatch,     // inputs are individually valid but do not fit together
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// A validation failure tied to a line of an input file.
class FormatError : public Error {
 public:
  FormatError(std::string source, std::size_t line, const std::string& message)
      : Error(ErrorKind::validation, source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line),
        detail_(message) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string detail_;
};

[[noreturn]] inline void throw_invalid(const std::string& message) {
  throw Error(ErrorKind::invalid_argument, message);
}

[[noreturn]] inline void throw_mismatch(const std::string& message) {
  throw Error(ErrorKind::data_mismatch, message);
}

}  // namespace ensdet
