#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "radsynth/radiomics/features.hpp"

namespace radsynth::app {

/// Settings shared by every command. Loaded from `--config file.json`; flags
/// given on the command line override the file.
///
/// Keys: discretization ("count" | "width"), bins, bin_width, threads, T, s,
/// steps, seed, output_dir, port. Anything else is UnknownKey.
struct RunConfig {
  std::string discretization = "count";
  int bins = 32;
  double bin_width = 25.0;
  int threads = 1;
  int total_steps = 1000;
  double variance_scale = 1.0;
  std::optional<int> inference_steps;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  int port = 8080;

  /// Throws BadParams.
  void validate() const;
  ExtractionConfig extraction() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
};

}  // namespace radsynth::app
