#pragma once

// Shared data model: media payloads, clips, permutations, puzzles, reward and
// filter reports. Indices that appear in prompts, answers or serialized forms
// are 1-based.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace omnijigsaw {

inline constexpr int kSchemaVersion = 1;

/// One decoded RGB frame, 8 bits per channel, row-major, interleaved.
struct Frame {
  int width = 0;
  int height = 0;
  double timestamp_s = 0.0;
  std::vector<std::uint8_t> rgb;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool operator==(const Frame&) const = default;
};

/// Mono PCM in [-1, 1].
struct Waveform {
  int sample_rate_hz = 16000;
  std::vector<float> samples;

  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
  bool operator==(const Waveform&) const = default;
};

/// A source recording. Frame timestamps are strictly increasing.
struct OmniSample {
  std::string id;
  std::vector<Frame> video;
  Waveform audio;
  double duration_s = 0.0;
  bool has_video = false;
  bool has_audio = false;
  std::string source_path;
  std::string source_tag = "default";
};

/// Throws Error(InvalidArgument) when the sample violates its invariants.
void validate(const OmniSample& sample);

/// One temporal segment of a sample. A masked modality carries an empty payload.
struct Clip {
  int orig_index = 0;  // 1..N
  double start_s = 0.0;
  double duration_s = 0.0;
  std::vector<Frame> frames;
  std::vector<float> audio;  // 16 kHz
  bool video_present = true;
  bool audio_present = true;

  bool operator==(const Clip&) const = default;
};

/// A bijection of {1..N}. forward(i) is the shuffled position of chronological clip i.
class Permutation {
 public:
  Permutation() = default;
  /// Throws Error(InvalidArgument) unless `forward` is a bijection of {1..N}.
  explicit Permutation(std::vector<int> forward);

  static Permutation identity(int n);

  int size() const { return static_cast<int>(forward_.size()); }
  int forward(int i) const { return forward_.at(static_cast<std::size_t>(i - 1)); }
  int inverse(int j) const { return inverse_.at(static_cast<std::size_t>(j - 1)); }
  const std::vector<int>& forward_array() const { return forward_; }
  const std::vector<int>& inverse_array() const { return inverse_; }

  /// Ground-truth answer [π(1), …, π(N)].
  const std::vector<int>& answer() const { return forward_; }

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<int> forward_;
  std::vector<int> inverse_;
};

/// shuffled[j] = items[π⁻¹(j)].
template <typename T>
std::vector<T> shuffle_by(std::span<const T> items, const Permutation& perm) {
  std::vector<T> out;
  out.reserve(items.size());
  for (int j = 1; j <= perm.size(); ++j) out.push_back(items[static_cast<std::size_t>(perm.inverse(j) - 1)]);
  return out;
}

/// chronological[i] = shuffled[answer[i]]. Out-of-range entries are skipped.
template <typename T>
std::vector<T> reassemble(std::span<const T> shuffled, std::span<const int> answer) {
  std::vector<T> out;
  out.reserve(answer.size());
  for (int idx : answer) {
    if (idx >= 1 && static_cast<std::size_t>(idx) <= shuffled.size()) out.push_back(shuffled[static_cast<std::size_t>(idx - 1)]);
  }
  return out;
}

enum class Strategy { Jmi, Sms, Cmm, Video, Audio };
enum class Modality { V, A };
enum class ClipModality { V, A, VA };

std::string_view to_string(Strategy s);
std::string_view to_string(Modality m);
std::string_view to_string(ClipModality m);
std::optional<Strategy> parse_strategy(std::string_view s);
std::optional<ClipModality> parse_clip_modality(std::string_view s);

struct PuzzleInstance {
  std::string sample_id;
  int n_clips = 0;
  Strategy strategy = Strategy::Jmi;
  std::vector<Clip> shuffled_clips;
  Permutation permutation;
  std::optional<Modality> dominance;                       // SMS only
  std::optional<std::vector<ClipModality>> modality_vector;  // CMM only, chronological order
  std::string prompt_id;
  std::uint64_t rng_seed = 0;

  const std::vector<int>& ground_truth() const { return permutation.answer(); }
};

struct RewardBreakdown {
  double r_pos = 0.0;
  double r_cont = 0.0;
  double lambda = 0.2;
  double r_fmt = 0.0;
  double r_rep = 0.0;
  double r_total = 0.0;
  bool format_ok = false;
  bool parsed_ok = false;
  bool perfect = false;

  bool operator==(const RewardBreakdown&) const = default;
};

enum class RejectReason {
  Invalid,
  TooLong,
  MissingStream,
  StaticVideo,
  Silence,
  LowFlux,
  VadOutOfBounds,
  VadError,
  SemanticNo,
};

std::string_view to_string(RejectReason r);
std::optional<RejectReason> parse_reject_reason(std::string_view s);

enum class Decision { Yes, No };

struct Stage1Report {
  double duration_s = 0.0;
  bool duration_ok = false;
  bool streams_ok = false;
  std::optional<double> static_ratio;
  std::optional<double> silence_ratio;
  std::optional<double> flux_variance;
  std::optional<double> speech_ratio;
  bool pass = false;
  std::optional<RejectReason> reject_reason;

  bool operator==(const Stage1Report&) const = default;
};

struct Stage2Report {
  std::string think_text;
  Decision decision = Decision::No;
  bool coherent = false;
  bool pass = false;
  bool deferred = false;
  std::optional<RejectReason> reject_reason;

  bool operator==(const Stage2Report&) const = default;
};

struct FilterReport {
  std::string sample_id;
  Stage1Report stage1;
  std::optional<Stage2Report> stage2;

  bool operator==(const FilterReport&) const = default;
};

struct FilterConfig {
  double d_max_s = 200.0;
  double frame_interval_s = 1.0;
  double mad_threshold = 5.0;
  double max_static_ratio = 0.70;
  int sample_rate_hz = 16000;
  double rms_silence_db = -40.0;
  double max_silence_ratio = 0.70;
  double min_flux_variance = 0.5;
  double vad_min = 0.30;
  double vad_max = 0.80;

  /// Throws Error(Config) on non-finite thresholds or inverted VAD bounds.
  void validate() const;
};

}  // namespace omnijigsaw
