#pragma once

#include <stdexcept>

namespace edgemig {

/// Invalid parameter or configuration value.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A placement or route would push a server or link past its capacity.
struct InfeasiblePlacement : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Processing delay requested for a server at or above full CPU utilization.
struct SaturationError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Delay evaluated on a forwarding graph that is not fully placed and routed.
struct IncompleteMapping : std::logic_error {
  using std::logic_error::logic_error;
};

/// Malformed migration command or out-of-range action index.
struct CommandError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Non-finite loss or gradient during training.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace edgemig
