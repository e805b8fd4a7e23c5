#pragma once

#include <string>

#include "bevnav/model.hpp"
#include "bevnav/scenegen.hpp"
#include "bevnav/train.hpp"

namespace bevnav {

// Run-wide configuration for the CLI. Every field has a default; a JSON
// config file overrides only the keys it names, and command-line flags
// override the file.
struct RunConfig {
  uint64_t seed = 7;
  int threads = 1;
  int resolution = 64;   // rendered view side in pixels
  GridSpec grid;         // shared by dataset generation and the model
  DatasetConfig dataset;
  ModelConfig model;
  TrainSchedule schedule;

  /// Propagates the shared grid/resolution/vocabulary into the sub-configs.
  void sync();
};

RunConfig default_run_config();

/// Defaults overlaid with the keys present in the JSON file.
RunConfig load_run_config(const std::string& path);

std::string run_config_to_json_text(const RunConfig& config);

}  // namespace bevnav
