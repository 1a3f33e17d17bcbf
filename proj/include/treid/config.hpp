#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "treid/harness.hpp"

namespace treid {

// Experiment configuration files. Two encodings of the same schema are
// accepted, chosen by file extension: JSON, or a small TOML subset
// (single-level [section] tables; string/int/float/bool values; flat or
// one-level-nested arrays; '#' comments). See the README for the schema.

// Parses the TOML subset into an equivalent JSON object.
nlohmann::json parse_toml_subset(const std::string& text);

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace treid
