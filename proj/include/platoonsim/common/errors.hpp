#pragma once

#include <stdexcept>
#include <string>

namespace psim {

// Caller broke a documented precondition.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Scenario/config cannot be realized (e.g. spawn range too small).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite loss/gradients or solver breakdown during training.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

// Flat QMIX evaluated with an agent count it was not built for.
struct AgentCountMismatch : ContractViolation {
    explicit AgentCountMismatch(const std::string& what) : ContractViolation(what) {}
};

// MPC solver failed to converge within its iteration cap.
struct ControllerError : std::runtime_error {
    explicit ControllerError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace psim
