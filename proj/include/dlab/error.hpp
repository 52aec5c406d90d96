#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

/// Base error. Every error names the module and operation that raised it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string op, const std::string& what);

  const std::string& module() const noexcept { return module_; }
  const std::string& op() const noexcept { return op_; }

  /// Process exit code used by the command-line runner.
  virtual int exit_code() const noexcept { return 1; }

 private:
  std::string module_;
  std::string op_;
};

/// Bad input or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Iterative method failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// A structural invariant was violated at run time.
class InvariantError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace dlab
