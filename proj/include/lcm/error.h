#pragma once

#include <stdexcept>
#include <string>

namespace lcm {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid flags, configuration files or pipeline specs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: CoNLL-U, TSV, vector files, checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + ", line " + std::to_string(line)), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

// A tree-derived tag scheme was requested for a sentence whose gold heads do
// not form a valid tree.
class DerivationError : public DataError {
 public:
  using DataError::DataError;
};

// Violated operation precondition (bad index, misaligned inputs).
class ContractError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Non-finite losses, failed gradient checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcm
