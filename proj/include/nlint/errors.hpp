#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlint {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A HITRAN record whose length is not 160 characters.
class RecordLengthError : public Error {
 public:
  RecordLengthError(std::size_t length, std::size_t line_number = 0)
      : Error(make_message(length, line_number)), length_(length), line_number_(line_number) {}

  std::size_t length() const noexcept { return length_; }
  /// 1-based line number within a file, 0 when unknown.
  std::size_t line_number() const noexcept { return line_number_; }

 private:
  static std::string make_message(std::size_t length, std::size_t line_number) {
    std::string msg;
    if (line_number > 0) msg = "line " + std::to_string(line_number) + ": ";
    return msg + "HITRAN record has " + std::to_string(length) + " characters, expected 160";
  }

  std::size_t length_;
  std::size_t line_number_;
};

/// Non-numeric or out-of-range content in a fixed-width field.
class FieldParseError : public Error {
 public:
  FieldParseError(int first_column, int last_column, const std::string& what)
      : Error("columns " + std::to_string(first_column) + "-" + std::to_string(last_column) + ": " +
              what),
        first_column_(first_column),
        last_column_(last_column) {}

  int first_column() const noexcept { return first_column_; }
  int last_column() const noexcept { return last_column_; }

 private:
  int first_column_;
  int last_column_;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input that makes a formula divide by zero (equal cross sections, zero photons...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Visibility fit failure.
class FitError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlint
