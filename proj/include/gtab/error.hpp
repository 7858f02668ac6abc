#pragma once

#include <stdexcept>
#include <string>

namespace gtab {

/// Base error. The exit code is what the command-line tool returns when the
/// error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Malformed or inconsistent input (files, arguments, shapes).
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Non-convergence, non-finite values, singular systems.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Anything that went wrong talking to the external prediction bridge.
class BridgeError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace gtab
