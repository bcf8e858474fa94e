/// @file
/// @brief Exception types shared by the library.
#pragma once

#include <stdexcept>
#include <string>

namespace nsadm {

/// Operand sizes do not agree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A parameter violates its documented invariant.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A linear system was singular or an iterative solve did not converge.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Closed-loop simulation failure; carries the controller step index.
struct SimulationError : std::runtime_error {
  SimulationError(const std::string &what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step(step) {}
  long step;
};

/// Malformed scenario, override or command line.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace nsadm
