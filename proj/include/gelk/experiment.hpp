#pragma once

// Configuration-driven experiments shared by the CLI and the Python module.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelk/model_io.hpp"

namespace gelk {

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"tg",    "gel-curve",   "moments",  "simulate", "graph",
                                                 "restricted", "convergence", "coupling", "duality"};
  return kinds;
}

bool is_stochastic_kind(const std::string& kind);

struct ExperimentConfig {
  std::string kind;
  nlohmann::json model;  // "builtin:<name>", a file path, or an inline model object
  std::optional<std::uint64_t> seed;
  bool paper_convention = false;
  unsigned threads = 0;
  std::string output_dir;  // empty: primary artifact goes to stdout
  nlohmann::json params;   // kind-specific, defaults filled in
  nlohmann::json source;   // the validated document, used for the config hash
};

/// Validates a config document and fills defaults. Throws SchemaError with
/// a JSON pointer to the offending field. `base_dir` resolves relative
/// model paths.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// The system and measure named by a config, with the doubled-rate convention
/// applied when requested.
Model config_model(const ExperimentConfig& config);

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
  bool binary = false;
};

struct RunOutput {
  std::vector<Artifact> artifacts;  // the first one is the primary artifact
  double wall_seconds = 0.0;
};

RunOutput run_experiment(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical config dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Writes the artifacts and a manifest into `dir`; returns the written paths.
std::vector<std::string> write_artifacts(const ExperimentConfig& config, const RunOutput& out,
                                         const std::string& dir);

/// Output directory: the GELK_OUTPUT_DIR environment variable wins over the
/// configured one.
std::string resolve_output_dir(const ExperimentConfig& config);

/// Round-trip float formatting (17 significant digits).
std::string format_double(double x);

}  // namespace gelk
