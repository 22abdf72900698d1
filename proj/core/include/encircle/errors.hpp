#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace encircle {

/// Base error. `code()` is a stable machine-readable tag used by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message);

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Non-finite or otherwise unusable input to a dynamics step.
class ModelInputError : public Error {
 public:
  explicit ModelInputError(const std::string& message);
};

/// Invalid scenario, sensor, controller or analysis configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message);
};

/// Malformed task tables exchanged during assignment.
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& message);
};

class AssignmentError : public Error {
 public:
  AssignmentError(const std::string& message, std::vector<int> unassigned_targets);

  const std::vector<int>& unassigned_targets() const noexcept { return unassigned_; }

 private:
  std::vector<int> unassigned_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message);
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& message);
};

class AnalysisError : public Error {
 public:
  explicit AnalysisError(const std::string& message);
};

/// A scenario run aborted at `step()`; `cause()` is the code of the underlying error.
class RunError : public Error {
 public:
  RunError(long step, std::string cause, const std::string& message);

  long step() const noexcept { return step_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  long step_;
  std::string cause_;
};

}  // namespace encircle
