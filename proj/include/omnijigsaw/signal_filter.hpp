#pragma once

// Stage-1 heuristic filtering: modal integrity, visual dynamism, acoustic
// information density. Checks run in a fixed order and short-circuit on the
// first failure.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omnijigsaw/media.hpp"
#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

inline constexpr int kThumbnailSide = 64;
inline constexpr double kDbEpsilon = 1e-10;

/// Throws Error(Unreadable) for I/O failures and Error(NotMedia) for probe failures.
MediaMeta probe_media(const std::filesystem::path& path, const MediaDecoder& decoder);

/// Distinct frames nearest to t = 0, Δt, 2Δt, … up to the last frame.
std::vector<Frame> sample_at_interval(std::span<const Frame> video, double interval_s);

/// Mean absolute difference of 64×64 grayscale thumbnails, 0–255 scale.
double mean_abs_difference(const Frame& a, const Frame& b);

/// Fraction of adjacent transitions with MAD below `mad_threshold`. Fewer than
/// two frames count as fully static (1.0).
double static_ratio(std::span<const Frame> sampled, double mad_threshold);

/// Fraction of 2048/512 RMS frames more than |rms_silence_db| below the loudest
/// frame. Empty or all-zero audio is fully silent (1.0).
double silence_ratio(std::span<const float> audio_16k, double rms_silence_db);

/// Onset strength: mean over bins of the half-wave rectified increase in
/// magnitude between consecutive short-time spectra.
std::vector<double> onset_strength(std::span<const float> audio_16k);

/// Population variance of the onset-strength envelope; 0 for empty audio.
double flux_variance(std::span<const float> audio_16k);

struct SpeechSegment {
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Pluggable voice-activity detector. Implementations may throw to signal failure.
class SpeechActivityDetector {
 public:
  virtual ~SpeechActivityDetector() = default;
  virtual std::vector<SpeechSegment> segments(std::span<const float> audio_16k, int sample_rate_hz) const = 0;
};

struct EnergyVadConfig {
  double frame_ms = 20.0;
  double relative_db = -35.0;  // below the loudest frame → not speech
  double absolute_db = -60.0;  // dBFS floor
  double zcr_min = 0.005;
  double zcr_max = 0.25;
  double min_speech_ms = 100.0;
  double max_gap_ms = 200.0;   // shorter pauses are bridged
};

/// Energy plus zero-crossing-rate heuristic. Voiced speech is loud relative to
/// the recording and has a low crossing rate; broadband noise does not.
class EnergyVad final : public SpeechActivityDetector {
 public:
  explicit EnergyVad(EnergyVadConfig config = {}) : config_(config) {}
  std::vector<SpeechSegment> segments(std::span<const float> audio_16k, int sample_rate_hz) const override;

 private:
  EnergyVadConfig config_;
};

/// Total detected speech over `duration_s`, clamped to [0, 1].
/// Throws Error(DetectorFailure) if the detector throws.
double speech_ratio(std::span<const float> audio_16k, int sample_rate_hz, double duration_s,
                    const SpeechActivityDetector& detector);

/// Runs every check on a decoded sample. Never throws for sample-level problems.
FilterReport run_stage1(const OmniSample& sample, const FilterConfig& config, const SpeechActivityDetector& detector);

/// Probe, duration/stream gate, decode, then the remaining checks. Probe and
/// decode failures become reject_reason=INVALID. `decoded` receives the sample
/// when decoding happened.
FilterReport run_stage1(const std::filesystem::path& path, const MediaDecoder& decoder, const FilterConfig& config,
                        const SpeechActivityDetector& detector, std::optional<OmniSample>* decoded = nullptr);

/// Re-encodes passing samples to H.264/AAC MP4 with an external transcoder, or
/// copies the source through when no transcoder is available.
class Standardizer {
 public:
  explicit Standardizer(std::string transcoder_path = "") : transcoder_(std::move(transcoder_path)) {}
  bool transcoder_available() const;
  /// Returns the written path.
  std::filesystem::path standardize(const std::filesystem::path& input, const std::filesystem::path& out_dir) const;

 private:
  std::string transcoder_;
};

}  // namespace omnijigsaw
