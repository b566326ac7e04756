#include "omnijigsaw/package.hpp"

#include <cmath>
#include <fstream>

#include "omnijigsaw/error.hpp"
#include "omnijigsaw/media.hpp"

namespace omnijigsaw {

namespace fs = std::filesystem;

fs::path write_puzzle_package(const PuzzleInstance& puzzle, const fs::path& dir, int sample_rate_hz) {
  fs::path staging = dir;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  for (std::size_t j = 0; j < puzzle.shuffled_clips.size(); ++j)
    write_clip_media(staging / clip_file_name(static_cast<int>(j) + 1), puzzle.shuffled_clips[j], sample_rate_hz);
  {
    std::ofstream out(staging / "puzzle.json", std::ios::binary);
    out << to_json(make_document(puzzle)).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::Unreadable, "cannot write " + (staging / "puzzle.json").string());
  }
  fs::remove_all(dir);
  fs::rename(staging, dir);
  return dir / "puzzle.json";
}

PuzzleDocument validate_puzzle_package(const fs::path& dir) {
  const PuzzleDocument doc = load_puzzle_document(dir / "puzzle.json");
  const RawMediaDecoder decoder;
  for (const auto& m : doc.clip_meta) {
    const fs::path clip = dir / m.file;
    if (!fs::exists(clip)) throw Error(ErrorCode::InvalidJson, "missing clip file " + clip.string());
    const MediaMeta meta = decoder.probe(clip);
    if (meta.has_video != m.video_present || meta.has_audio != m.audio_present)
      throw Error(ErrorCode::InvalidJson, m.file + ": stream presence differs from clip_meta");
    if (m.video_present && (static_cast<int>(meta.n_frames) != m.n_frames || meta.width != m.width ||
                            meta.height != m.height))
      throw Error(ErrorCode::InvalidJson, m.file + ": frame layout differs from clip_meta");
    if (std::abs(meta.duration_s - m.duration_s) > 1e-9)
      throw Error(ErrorCode::InvalidJson, m.file + ": duration differs from clip_meta");
  }
  return doc;
}

}  // namespace omnijigsaw
