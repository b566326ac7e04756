#pragma once

// Append-only JSONL manifest. One record per stage transition:
//
//   {"schema_version": 1, "seq": 0, "sample_id": "...", "source_path": "...",
//    "source_tag": "...", "stage": "S1_PASS", "report": {...} | null,
//    "puzzle_path": "puzzles/<id>/puzzle.json",   (BUILT only)
//    "error": "...",                              (BUILD_FAILED only)
//    "timestamps": {"logical": seq, "wall": "..."?}}

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

enum class Stage { Probed, S1Pass, S1Reject, S2Pass, S2Reject, Deferred, BuildFailed, Built };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

/// Position along PROBED → S1 → S2 → BUILT; rejects share their stage's rank.
int stage_rank(Stage s);
bool is_terminal(Stage s);

struct ManifestRecord {
  int schema_version = kSchemaVersion;
  std::uint64_t seq = 0;
  std::string sample_id;
  std::string source_path;
  std::string source_tag = "default";
  Stage stage = Stage::Probed;
  std::optional<FilterReport> report;
  std::optional<std::string> puzzle_path;
  std::optional<std::string> error;
  std::optional<std::string> wall_time;

  bool operator==(const ManifestRecord&) const = default;
};

std::string to_json_line(const ManifestRecord& r);
/// Throws Error(InvalidJson).
ManifestRecord record_from_json_line(std::string_view line);

/// Strict read; a malformed line throws Error(CorruptManifest) naming its
/// 1-based line number. A missing file reads as empty.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Appender. Opening recovers from a crash mid-write by dropping an
/// unterminated final line.
class Manifest {
 public:
  Manifest(std::filesystem::path path, bool wall_clock = false);

  /// Assigns seq (and wall time when enabled) and appends durably.
  void append(ManifestRecord record);

  const std::vector<ManifestRecord>& records() const { return records_; }
  /// Latest record per sample id.
  std::optional<ManifestRecord> latest(const std::string& sample_id) const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool wall_clock_;
  std::mutex mu_;
  std::ofstream out_;
  std::vector<ManifestRecord> records_;
  std::map<std::string, std::size_t> latest_;
};

struct StageCounts {
  std::uint64_t raw = 0;
  std::uint64_t after_stage1 = 0;
  std::uint64_t after_stage2 = 0;
  std::uint64_t built = 0;

  bool operator==(const StageCounts&) const = default;
};

/// Per source tag, from each sample's furthest stage.
std::map<std::string, StageCounts> aggregate_stats(std::span<const ManifestRecord> records);

/// "49,619"
std::string with_thousands(std::uint64_t v);

/// Fixed-width table with one row per tag and a Total row.
std::string format_stats_table(const std::map<std::string, StageCounts>& stats);

}  // namespace omnijigsaw
