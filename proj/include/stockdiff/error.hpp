#pragma once

#include <stdexcept>
#include <string>

namespace stockdiff {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { Config = 2, Data = 3, Numeric = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

// Bad parameters, shapes or configuration values.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

// Malformed or unusable input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

// Non-finite values, divergence, undefined statistics.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

}  // namespace stockdiff
