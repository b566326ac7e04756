#pragma once

// Deterministic synthetic media for tests and desk-scale runs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "omnijigsaw/types.hpp"

namespace omnijigsaw::fixtures {

enum class VideoKind { None, Dynamic, Static };
enum class AudioKind { None, Speech, SparseSpeech, Tone, Noise, Percussive };

struct FixtureSpec {
  std::string name;
  double duration_s = 30.0;
  double fps = 2.0;
  int width = 128;
  int height = 72;
  int sample_rate_hz = 16000;
  VideoKind video = VideoKind::Dynamic;
  AudioKind audio = AudioKind::Speech;
  double activity = 0.5;  // speech fraction for speech kinds
  std::optional<RejectReason> expected;  // stage-1 outcome; nullopt = pass
  bool corrupt = false;                  // write garbage bytes instead of media
};

/// Moving sinusoidal gradient with a drifting block; every one-second step
/// changes the thumbnail substantially.
std::vector<Frame> dynamic_video(double duration_s, double fps, int width, int height, std::uint64_t seed);
/// One frame repeated.
std::vector<Frame> static_video(double duration_s, double fps, int width, int height, std::uint64_t seed);

/// Voiced harmonic stacks with syllabic onsets in active spans that cover
/// `activity` of the timeline; low broadband noise elsewhere.
std::vector<float> speech_audio(double duration_s, int rate, double activity, std::uint64_t seed);
/// Speech spans over digital silence.
std::vector<float> sparse_speech_audio(double duration_s, int rate, double activity, std::uint64_t seed);
std::vector<float> tone_audio(double duration_s, int rate, double freq_hz = 440.0, double amplitude = 0.5);
std::vector<float> noise_audio(double duration_s, int rate, double amplitude, std::uint64_t seed);
/// Broadband bursts (no voicing) over noise, plus `activity` of speech.
std::vector<float> percussive_audio(double duration_s, int rate, double activity, std::uint64_t seed);

OmniSample make_sample(const FixtureSpec& spec, std::uint64_t seed);

/// The 20-fixture corpus: 10 designed to pass stage 1, 10 designed to hit a
/// specific reject branch.
std::vector<FixtureSpec> corpus_specs();

struct FixtureLabel {
  std::string file;  // relative to the output directory
  std::string sample_id;
  std::string expected_stage1;  // "PASS" or a reject reason
};

/// Writes `<dir>/synthetic/<name>.ojm` for every spec and `<dir>/fixture_labels.json`.
std::vector<FixtureLabel> gen_fixtures(const std::filesystem::path& dir, std::uint64_t seed);

/// Random in-memory sample with both streams, for property tests.
OmniSample random_sample(std::mt19937_64& rng, const std::string& id);

}  // namespace omnijigsaw::fixtures
