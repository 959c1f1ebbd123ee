#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace eulerlab {

/// Violated precondition on an argument (bad N, mismatched mode sets, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested operation exists but not for these inputs (e.g. FD oracle in d != 2).
class Unsupported : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Linear solver failure, singular system, non-convergence.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time integrator produced a non-finite or runaway state.
class BlowUpError : public NumericalFailure {
 public:
  BlowUpError(std::uint64_t step, const std::string& what)
      : NumericalFailure("blow-up at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

/// Configuration document could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

/// Syntax error in a configuration document.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : ConfigError({"parse error at byte " + std::to_string(byte_offset) + ": " + message}),
        offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Semantic violation, lists every offending field.
class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eulerlab
