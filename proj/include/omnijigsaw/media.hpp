#pragma once

// Media access. Compressed-media decode sits behind MediaDecoder; the built-in
// decoder reads the raw `.ojm` container used for fixtures and clip files:
//
//   bytes 0..7   "OJMEDIA1"
//   u32 LE       header length H
//   H bytes      UTF-8 JSON header {schema_version, duration_s, has_video,
//                has_audio, width, height, n_frames, frame_timestamps,
//                sample_rate_hz, n_samples, sample_format ("s16le"|"f32le"),
//                source_tag?}
//   frames       n_frames * width * height * 3 bytes, RGB
//   audio        n_samples mono samples in sample_format

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

struct MediaMeta {
  double duration_s = 0.0;
  bool has_video = false;
  bool has_audio = false;
  int width = 0;
  int height = 0;
  int source_sample_rate_hz = 0;
  std::size_t n_frames = 0;
};

/// Decode-time reductions. Zero means unbounded.
struct DecodeOptions {
  double max_fps = 0.0;
  std::size_t max_pixels = 0;
};

class MediaDecoder {
 public:
  virtual ~MediaDecoder() = default;
  virtual bool handles(const std::filesystem::path& path) const = 0;
  /// Container-level metadata; throws Error(Unreadable|NotMedia).
  virtual MediaMeta probe(const std::filesystem::path& path) const = 0;
  /// Full decode; audio keeps its source rate.
  virtual OmniSample decode(const std::filesystem::path& path, const DecodeOptions& options) const = 0;
};

class RawMediaDecoder final : public MediaDecoder {
 public:
  bool handles(const std::filesystem::path& path) const override;
  MediaMeta probe(const std::filesystem::path& path) const override;
  OmniSample decode(const std::filesystem::path& path, const DecodeOptions& options) const override;
};

/// libav*-backed decoder; nullptr when the build has no FFmpeg support.
std::unique_ptr<MediaDecoder> make_ffmpeg_decoder();

/// Dispatches on file type: `.ojm` to the raw decoder, anything else to FFmpeg.
class MediaRegistry final : public MediaDecoder {
 public:
  MediaRegistry();
  bool handles(const std::filesystem::path& path) const override;
  MediaMeta probe(const std::filesystem::path& path) const override;
  OmniSample decode(const std::filesystem::path& path, const DecodeOptions& options) const override;

 private:
  const MediaDecoder& pick(const std::filesystem::path& path) const;
  RawMediaDecoder raw_;
  std::unique_ptr<MediaDecoder> ffmpeg_;
};

enum class SampleFormat { S16, F32 };

/// Writes `sample` (frames plus mono audio at its own rate) as `.ojm`.
void write_raw_media(const std::filesystem::path& path, const OmniSample& sample,
                     SampleFormat format = SampleFormat::S16);

/// Writes one clip as `.ojm`: masked streams are omitted from the file.
void write_clip_media(const std::filesystem::path& path, const Clip& clip, int sample_rate_hz);

inline constexpr const char* kRawMediaExtension = ".ojm";

}  // namespace omnijigsaw
