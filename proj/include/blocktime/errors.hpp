#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blocktime {

// Inputs that must be fed in nondecreasing order arrived out of order.
class OrderingError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Structurally valid input whose content makes the requested computation
// undefined (constant series, empty dataset, ...).
class DegenerateInputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

// Filesystem-level failure (unopenable path, failed write).
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A configuration field failed validation; carries the field name.
class ConfigError : public std::invalid_argument {
  public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

}  // namespace blocktime
