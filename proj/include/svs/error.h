#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svs {

/// Base for every error the library reports. Callers that only need a
/// diagnostic can catch this and print what().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text input could not be read. Line and column are 1-based; a column of 0
/// means the whole line.
class ParseError : public Error {
 public:
  enum class Kind { Syntax, Mapping, Value };

  ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

/// Inputs were well-formed but violate a numeric or structural contract
/// (shape mismatch, out-of-range parameter, invalid configuration).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A note cannot hold its phonemes at the requested frame resolution.
class InfeasibleNoteError : public ValidationError {
 public:
  InfeasibleNoteError(std::size_t note, const std::string& message)
      : ValidationError("note " + std::to_string(note) + ": " + message), note_(note) {}

  std::size_t note() const noexcept { return note_; }

 private:
  std::size_t note_;
};

const char* to_string(ParseError::Kind kind) noexcept;

}  // namespace svs
