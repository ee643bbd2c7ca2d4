#pragma once

#include <stdexcept>
#include <string>

#include "ltfl/orchestrator.hpp"

namespace ltfl {

// Anything wrong with a config file: unreadable, bad JSON, unknown keys,
// wrong types, out-of-range values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Single-run config.  Unknown keys are rejected, not ignored — a typo in
// "eligible_ratio" must not silently run the default experiment.
ExperimentConfig parse_experiment_config_text(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Grid config: {"base": <experiment config>, "axes": {...}}.  Every axis
// is optional and falls back to the base value; present axes must be
// non-empty.
MatrixSpec parse_matrix_spec_text(const std::string& json_text);
MatrixSpec load_matrix_spec(const std::string& path);

bool is_matrix_config_text(const std::string& json_text);

}  // namespace ltfl
