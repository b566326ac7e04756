#pragma once

// Flat JSON configuration. Keys mirror the FilterConfig/BuildConfig field
// names; screening-specific keys carry a `screen_` prefix where a name would
// otherwise collide. Unknown keys are rejected.

#include <filesystem>
#include <string>
#include <vector>

#include "omnijigsaw/inference.hpp"
#include "omnijigsaw/puzzle_builder.hpp"
#include "omnijigsaw/reward.hpp"
#include "omnijigsaw/signal_filter.hpp"
#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

struct PipelineConfig {
  FilterConfig filter;
  EnergyVadConfig vad;
  BuildConfig build;
  InferenceConfig inference;
  Strategy strategy = Strategy::Jmi;
  int workers = 1;
  bool standardize = false;
  std::string transcoder = "ffmpeg";
  bool wall_clock_timestamps = false;
  bool audit_log = true;

  /// Throws Error(Config).
  void validate() const;
};

/// Every recognised key, in documentation order.
std::vector<std::string> config_keys();

/// Throws Error(Config) for malformed JSON, unknown keys or bad values.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Full effective configuration as flat JSON.
std::string dump_config(const PipelineConfig& config);

}  // namespace omnijigsaw
