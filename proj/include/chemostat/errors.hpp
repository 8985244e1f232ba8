#ifndef CHEMOSTAT_ERRORS_HPP
#define CHEMOSTAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chemostat {

// Each error class maps to one process exit code of the command-line tool.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class PreconditionError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class PowerError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class NumericError : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

}  // namespace chemostat

#endif
