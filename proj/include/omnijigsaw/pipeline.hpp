#pragma once

// Corpus orchestration: probe → stage 1 → stage 2 → build, recorded in an
// append-only manifest under the output directory:
//
//   <out>/manifest.jsonl
//   <out>/puzzles/<sample_id>/{puzzle.json, clip_NN.ojm}
//   <out>/standardized/…              (when standardize is enabled)
//   <out>/inference_audit.jsonl       (redacted request/response log)

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "omnijigsaw/config.hpp"
#include "omnijigsaw/inference.hpp"
#include "omnijigsaw/manifest.hpp"
#include "omnijigsaw/media.hpp"
#include "omnijigsaw/reward.hpp"
#include "omnijigsaw/signal_filter.hpp"

namespace omnijigsaw {

enum class RunUntil { Stage1, Stage2, Built };

struct PipelineOptions {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  PipelineConfig config;
  RunUntil until = RunUntil::Built;
  bool resume = false;
  /// Overrides the HTTP client built from config.inference.
  InferenceClient* client = nullptr;
  /// Defaults to MediaRegistry / EnergyVad(config.vad).
  const MediaDecoder* decoder = nullptr;
  const SpeechActivityDetector* detector = nullptr;
};

struct PipelineResult {
  std::size_t samples = 0;
  std::size_t processed = 0;  // samples that received new records this run
  std::map<Stage, std::size_t> final_stages;
  int exit_code = 0;          // 0 ok, 2 some samples deferred
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;

struct InputFile {
  std::filesystem::path path;
  std::string relative;  // generic form, relative to the input directory
  std::string sample_id;
  std::string source_tag;
};

/// Media files under `input_dir`, sorted by relative path. The sample id is the
/// file stem; the source tag is the top-level subdirectory, or "default".
/// Throws Error(Config) on duplicate ids.
std::vector<InputFile> list_inputs(const std::filesystem::path& input_dir,
                                   const std::filesystem::path& exclude = {});

/// Config problems throw Error(Config) before any sample is touched; sample
/// problems are recorded in the manifest.
PipelineResult run_pipeline(const PipelineOptions& options);

/// Reads JSONL score requests from `in` and writes one breakdown per line to `out`:
///
///   {"response": "...", "puzzle_path": "..."}  or  {"response": "...", "ground_truth": [..]}
///   optional "tag_style": "think"|"thinking", "continuity": "aligned"|"adjacency"
///
/// A malformed request yields a zero breakdown with an added "error" field.
/// Returns the number of malformed requests.
std::size_t score_jsonl(std::istream& in, std::ostream& out, const RewardConfig& defaults = {});

}  // namespace omnijigsaw
