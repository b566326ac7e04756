#pragma once

// JSON forms of reports, reward breakdowns and puzzle metadata. Key order is
// fixed so serialized output can be compared byte for byte.
//
// puzzle.json:
//   {"schema_version": 1, "sample_id": "...", "n_clips": N, "strategy": "JMI",
//    "permutation": [π(1)..π(N)], "ground_truth": [π(1)..π(N)],
//    "dominance": "V"|"A",                  (sms only)
//    "modality_vector": ["V","A","VA",…],   (cmm only, chronological)
//    "prompt_id": "...", "rng_seed": u64,
//    "clip_meta": [{"position": j, "file": "clip_0j.ojm", "duration_s", "n_frames",
//                   "width", "height", "video_present", "audio_present"}, …]}
//
// clip_meta is in shuffled order and never reveals chronological positions.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

using nlohmann::ordered_json;

ordered_json to_json(const RewardBreakdown& b);
ordered_json to_json(const Stage1Report& r);
ordered_json to_json(const Stage2Report& r);
ordered_json to_json(const FilterReport& r);

/// Throws Error(InvalidJson) on shape errors.
RewardBreakdown reward_breakdown_from_json(const nlohmann::json& j);
FilterReport filter_report_from_json(const nlohmann::json& j);

struct ClipMeta {
  int position = 0;
  std::string file;
  double duration_s = 0.0;
  int n_frames = 0;
  int width = 0;
  int height = 0;
  bool video_present = false;
  bool audio_present = false;

  bool operator==(const ClipMeta&) const = default;
};

/// puzzle.json contents without media payloads.
struct PuzzleDocument {
  int schema_version = kSchemaVersion;
  std::string sample_id;
  int n_clips = 0;
  Strategy strategy = Strategy::Jmi;
  std::vector<int> permutation;
  std::vector<int> ground_truth;
  std::optional<Modality> dominance;
  std::optional<std::vector<ClipModality>> modality_vector;
  std::string prompt_id;
  std::uint64_t rng_seed = 0;
  std::vector<ClipMeta> clip_meta;

  bool operator==(const PuzzleDocument&) const = default;
};

std::string clip_file_name(int position);

PuzzleDocument make_document(const PuzzleInstance& puzzle);
ordered_json to_json(const PuzzleDocument& doc);

/// Parses and checks a puzzle document: schema version, permutation validity,
/// ground truth equal to the permutation, strategy-specific fields.
/// Throws Error(InvalidJson).
PuzzleDocument puzzle_document_from_json(const nlohmann::json& j);
PuzzleDocument load_puzzle_document(const std::filesystem::path& path);

/// Compact single-line dump used for JSONL records.
std::string dump_line(const ordered_json& j);

}  // namespace omnijigsaw
