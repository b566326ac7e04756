#pragma once

// Puzzle construction: uniform segmentation with boundary trimming, sparse
// frame sampling, patch-aligned rescaling, seeded permutation and per-strategy
// modality masking.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnijigsaw/inference.hpp"
#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

struct BuildConfig {
  int n_clips = 6;
  double trim_ratio = 0.05;
  double target_fps = 2.0;
  int min_frames = 2;
  int max_frames = 12;
  std::size_t pixel_budget = 100352;
  int patch = 28;
  int audio_rate_hz = 16000;
  double judge_fps = 1.0;
  int judge_max_frames = 80;
  std::uint64_t rng_seed = 0;
  double min_clip_s = 1.0;
  double max_audio_s = 600.0;
  int selector_retries = 1;

  /// Throws Error(Config).
  void validate() const;
};

/// N equal spans, each trimmed by trim_ratio at both ends, then cut to the
/// shortest. Clip audio is resampled to audio_rate_hz; frames keep absolute
/// timestamps. Throws Error(TooShort) or Error(InvalidArgument).
std::vector<Clip> segment_and_trim(const OmniSample& sample, const BuildConfig& config);

/// clamp(round(duration · target_fps), min_frames, max_frames) frames at
/// linearly spaced times covering both ends of the clip; each takes the
/// nearest source frame.
Clip downsample_frames(const Clip& clip, const BuildConfig& config);

/// Target size for one frame: patch multiples, never below one patch, within
/// the pixel budget, never upscaled.
std::pair<int, int> rescale_dims(int width, int height, std::size_t pixel_budget, int patch);

std::vector<Frame> rescale_frames(std::span<const Frame> frames, std::size_t pixel_budget, int patch);

/// Uniform over all n! orders (identity included). Throws Error(NTooSmall).
Permutation sample_permutation(int n, std::uint64_t seed);

/// Per-sample seed mixed from the corpus seed and the sample id.
std::uint64_t derive_seed(std::uint64_t corpus_seed, std::string_view sample_id);

/// Applies the strategy's masks to chronological `clips`, then shuffles them.
/// Throws Error(MissingDominance|VectorLengthMismatch|InvalidArgument).
PuzzleInstance shuffle_and_orchestrate(std::string sample_id, std::vector<Clip> clips, const Permutation& permutation,
                                       Strategy strategy, std::optional<Modality> dominance = std::nullopt,
                                       std::optional<std::vector<ClipModality>> modality_vector = std::nullopt);

/// Throws Error(UnparseableDominance).
Modality parse_dominance_answer(std::string_view raw);

/// Throws Error(InvalidJson|BadLength|BadToken). Degenerate all-same vectors
/// are returned with a warning.
std::vector<ClipModality> parse_modality_vector(std::string_view raw, int n);

struct DominanceContext {
  std::vector<Frame> frames;
  std::vector<float> audio;  // audio_rate_hz
};

/// min(max(1, floor(D · judge_fps)), judge_max_frames) frames spread evenly
/// over the whole recording, plus the full soundtrack.
DominanceContext build_dominance_context(const OmniSample& sample, const BuildConfig& config);

/// Audio accompanying a sparse frame sequence. A span of at most max_audio_s
/// yields the continuous segment between the first and last frame; longer
/// spans yield one max_audio_s/|frames| chunk per frame, zero-padded.
/// Throws Error(NoAudioStream).
std::vector<float> extract_audio_for_frames(const Waveform& audio, std::span<const double> frame_timestamps,
                                            double max_audio_s = 600.0);

/// Up to `max_frames` frames evenly spaced over `video` by index.
std::vector<Frame> uniform_frames(std::span<const Frame> video, std::size_t max_frames);

/// Asks the judge for the dominant modality; retries once on an unparseable
/// answer, then falls back to V. Transport errors propagate.
Modality judge_dominance(const OmniSample& sample, const BuildConfig& config, InferenceClient& client,
                         const InferenceConfig& inference);

/// Asks the selector for per-clip modalities (chronological clips); retries
/// once on a malformed answer, then falls back to all VA.
std::vector<ClipModality> select_modalities(std::span<const Clip> clips, const BuildConfig& config,
                                            InferenceClient& client, const InferenceConfig& inference,
                                            const std::string& tag);

/// End to end for one sample. `client` is required for SMS and CMM.
PuzzleInstance build_puzzle(const OmniSample& sample, Strategy strategy, const BuildConfig& config,
                            InferenceClient* client = nullptr, const InferenceConfig& inference = {});

}  // namespace omnijigsaw
