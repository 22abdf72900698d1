#include "encircle/errors.hpp"

#include <utility>

namespace encircle {

Error::Error(std::string code, const std::string& message)
    : std::runtime_error(message), code_(std::move(code)) {}

ModelInputError::ModelInputError(const std::string& message) : Error("model_input", message) {}

ConfigError::ConfigError(const std::string& message) : Error("config", message) {}

ProtocolError::ProtocolError(const std::string& message) : Error("protocol", message) {}

AssignmentError::AssignmentError(const std::string& message, std::vector<int> unassigned_targets)
    : Error("assignment_failure", message), unassigned_(std::move(unassigned_targets)) {}

NumericalError::NumericalError(const std::string& message) : Error("numerical_failure", message) {}

ArgumentError::ArgumentError(const std::string& message) : Error("argument", message) {}

AnalysisError::AnalysisError(const std::string& message) : Error("analysis", message) {}

RunError::RunError(long step, std::string cause, const std::string& message)
    : Error("run_aborted", message), step_(step), cause_(std::move(cause)) {}

}  // namespace encircle
