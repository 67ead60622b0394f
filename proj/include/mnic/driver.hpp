#pragma once

#include "mnic/config.hpp"

namespace mnic {

// Execute one experiment described by the config. Creates the output
// directory, writes the primary table plus manifest.json, and returns the
// process exit code: 0 on success, 2 for an invalid config, 3 for a
// numerical failure (which also leaves an error.json behind when the output
// directory is usable).
int run_experiment(const ExperimentConfig& cfg);

} // namespace mnic
