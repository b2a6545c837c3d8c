// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slicekit/params.hpp"
#include "slicekit/slicing.hpp"
#include "slicekit/training.hpp"

namespace slicekit::harness {

inline constexpr int kSchemaVersion = 1;

enum class Experiment : std::uint8_t { kOverview, kAblate, kScale, kNoise, kCompare };

std::string_view to_string(Experiment e);
/// Throws ConfigError for unknown names.
Experiment parse_experiment(std::string_view s);

struct DatasetConfig {
  std::string generator = "perturbed_boundary";  // or "random_slices"
  std::size_t n = 5000;
  double margin = 0.02;
  std::array<double, 3> fractions{0.7, 0.15, 0.15};
};

/// One experiment, fully described. See README for the JSON schema.
struct ExperimentConfig {
  Experiment experiment = Experiment::kOverview;
  DatasetConfig dataset;
  /// When empty, one noisy_truth SF per ground-truth slice with `sf_flip_rate`.
  std::vector<slicing::SfSpec> sfs;
  double sf_flip_rate = 0.0;
  std::vector<std::string> methods;
  train::Grid grid;
  train::Hyperparams hp;
  nn::BackboneConfig backbone;
  std::size_t d_prime = 13;
  bool renormalize_pred = false;
  std::vector<std::string> modes;  // ablate
  std::vector<std::size_t> sizes;  // scale
  std::vector<double> flip_rates;  // noise
  std::size_t noise_slice = 0;     // noise
  std::size_t grid_resolution = 200;
  std::vector<std::uint64_t> seeds;
  std::string out = "results";
  std::map<std::string, double> thresholds;
};

/// Defaults for each experiment; every JSON key is optional on top of these.
ExperimentConfig default_config(Experiment e);

/// Validates and converts a config document. Unknown keys, bad types, a
/// wrong schema_version, unresolvable SFs or empty seeds raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);

/// Applies "a.b.c=value" to the document. The value is parsed as JSON when
/// possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Reads a JSON file; raises ConfigError when missing or malformed.
nlohmann::json read_config_file(const std::string& path);

}  // namespace slicekit::harness
