#pragma once

#include <filesystem>
#include <string>

#include "mixad/dataset.hpp"
#include "mixad/training.hpp"

namespace mixad {

// Flat key=value run configuration covering training and synthesis. '#'
// starts a comment; unknown keys are rejected.
struct RunConfig {
  TrainConfig train;
  SynthConfig synth;

  // Applies one key=value pair; throws ValueError on unknown keys or bad
  // values. `context` prefixes error messages (file:line).
  void apply(const std::string& key, const std::string& value, const std::string& context);
};

RunConfig load_run_config(const std::filesystem::path& path);

// Serialization helper for anomaly specs: "spike:6:2,shift:90:2,corr:200:2".
std::vector<AnomalySpec> parse_anomaly_specs(const std::string& text, const std::string& context);

}  // namespace mixad
