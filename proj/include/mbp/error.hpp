#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mbp {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A solver was asked to handle an instance outside its declared limits.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// A penalty strategy cannot produce a lambda for the given graph.
class StrategyError : public Error {
 public:
  using Error::Error;
};

// Insufficient or inconsistent data (training rows, stores, models).
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace mbp
