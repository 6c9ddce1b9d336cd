#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skipstep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A line (or character position) of text that does not match its grammar.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string reason)
      : Error("parse error at " + std::to_string(position) + ": " + reason),
        position_(position),
        reason_(std::move(reason)) {}

  std::size_t position() const { return position_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line_no, std::string field)
      : Error("schema error on line " + std::to_string(line_no) + ": field '" +
              field + "'"),
        line_no_(line_no),
        field_(std::move(field)) {}

  std::size_t line_no() const { return line_no_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_no_;
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Raised when no admissible evaluation point can be found for an
/// equivalence test.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class InfeasibleBudget : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class InsufficientRecords : public Error {
 public:
  using Error::Error;
};

class TaskMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace skipstep
