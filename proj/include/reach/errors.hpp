#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reach {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arithmetic outside a function's domain, e.g. division by an interval containing 0.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

// Integration exceeded its step budget.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// Non-finite state or failed enclosure validation.
class BlowupError : public Error {
 public:
  using Error::Error;
};

class EnclosureFailure : public BlowupError {
 public:
  using BlowupError::BlowupError;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace reach
