#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/fixtures.hpp"
#include "omnijigsaw/media.hpp"
#include "omnijigsaw/signal_filter.hpp"

using namespace omnijigsaw;
namespace fs = std::filesystem;

namespace {

struct ThrowingVad final : SpeechActivityDetector {
  std::vector<SpeechSegment> segments(std::span<const float>, int) const override {
    throw std::runtime_error("model not loaded");
  }
};

struct FixedVad final : SpeechActivityDetector {
  std::vector<SpeechSegment> segs;
  std::vector<SpeechSegment> segments(std::span<const float>, int) const override { return segs; }
};

OmniSample sample_of(fixtures::FixtureSpec spec, std::uint64_t seed = 11) { return fixtures::make_sample(spec, seed); }

}  // namespace

TEST_CASE("frozen frames have zero MAD on every transition") {
  const auto frames = fixtures::static_video(10.0, 2.0, 64, 48, 5);
  const auto sampled = sample_at_interval(frames, 1.0);
  CHECK(sampled.size() == 10);
  for (std::size_t i = 1; i < sampled.size(); ++i) CHECK(mean_abs_difference(sampled[i - 1], sampled[i]) == 0.0);
  CHECK(static_ratio(sampled, 5.0) == 1.0);
}

TEST_CASE("dynamic fixture video moves every second") {
  const auto frames = fixtures::dynamic_video(20.0, 2.0, 128, 72, 5);
  const auto sampled = sample_at_interval(frames, 1.0);
  for (std::size_t i = 1; i < sampled.size(); ++i) CHECK(mean_abs_difference(sampled[i - 1], sampled[i]) >= 5.0);
  CHECK(static_ratio(sampled, 5.0) == 0.0);
}

TEST_CASE("interval sampling picks distinct nearest frames") {
  std::vector<Frame> v;
  for (double t : {0.0, 0.4, 0.9, 1.6, 3.1}) v.push_back(Frame{1, 1, t, {0, 0, 0}});
  const auto s = sample_at_interval(v, 1.0);
  REQUIRE(s.size() == 4);
  CHECK(s[0].timestamp_s == 0.0);
  CHECK(s[1].timestamp_s == 0.9);
  CHECK(s[2].timestamp_s == 1.6);
  CHECK(s[3].timestamp_s == 3.1);
  CHECK(static_ratio(std::span<const Frame>(v.data(), 1), 5.0) == 1.0);
  CHECK(sample_at_interval({}, 1.0).empty());
}

TEST_CASE("silence ratio") {
  CHECK(silence_ratio({}, -40.0) == 1.0);
  CHECK(silence_ratio(std::vector<float>(32000, 0.0f), -40.0) == 1.0);
  CHECK(silence_ratio(fixtures::tone_audio(2.0, 16000), -40.0) == 0.0);
  // first half loud, second half 60 dB down
  std::vector<float> x = fixtures::tone_audio(4.0, 16000, 440.0, 0.5);
  for (std::size_t i = x.size() / 2; i < x.size(); ++i) x[i] *= 0.001f;
  const double r = silence_ratio(x, -40.0);
  CHECK(r == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("flux matches a direct DFT reference") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  std::vector<float> x(2048 + 512 * 5 + 100);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i / 700) % 2 == 0 ? u(rng) : 0.05f * u(rng);
  const auto expect = oracle::onset_strength(x);
  const auto got = onset_strength(x);
  REQUIRE(got.size() == expect.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-9));
  CHECK(flux_variance(x) == doctest::Approx(oracle::variance(expect)).epsilon(1e-9));
}

TEST_CASE("flux extremes") {
  CHECK(flux_variance({}) == 0.0);
  CHECK(flux_variance(std::vector<float>(16000, 0.0f)) == 0.0);
  CHECK(flux_variance(fixtures::tone_audio(5.0, 16000)) < 1e-6);
  const double noise = flux_variance(fixtures::noise_audio(5.0, 16000, 0.3, 1));
  const double speech = flux_variance(fixtures::speech_audio(5.0, 16000, 0.5, 1));
  CHECK(noise < speech);
}

TEST_CASE("energy VAD on speech fixtures reproduces the designed activity") {
  const EnergyVad vad;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = fixtures::speech_audio(30.0, 16000, 0.5, seed);
    const double r = speech_ratio(x, 16000, 30.0, vad);
    CHECK(r >= 0.45);
    CHECK(r <= 0.55);
  }
}

TEST_CASE("energy VAD ignores tone, noise and silence") {
  const EnergyVad vad;
  CHECK(speech_ratio(std::vector<float>(16000 * 5, 0.0f), 16000, 5.0, vad) == 0.0);
  CHECK(speech_ratio(fixtures::noise_audio(5.0, 16000, 0.3, 2), 16000, 5.0, vad) < 0.05);
}

TEST_CASE("speech ratio merges overlaps and clamps to the duration") {
  FixedVad v;
  v.segs = {{1.0, 3.0}, {2.0, 4.0}, {9.0, 12.0}, {-1.0, 0.5}};
  CHECK(speech_ratio({}, 16000, 10.0, v) == doctest::Approx((0.5 + 3.0 + 1.0) / 10.0));
  CHECK_THROWS_AS(speech_ratio({}, 16000, 10.0, ThrowingVad{}), Error);
}

TEST_CASE("stage 1 records metrics up to the first failing check") {
  const FilterConfig cfg;
  const EnergyVad vad;
  fixtures::FixtureSpec spec;
  spec.name = "s";
  spec.duration_s = 20.0;

  SUBCASE("static video stops before audio checks") {
    spec.video = fixtures::VideoKind::Static;
    const auto r = run_stage1(sample_of(spec), cfg, vad);
    CHECK(r.stage1.reject_reason == RejectReason::StaticVideo);
    CHECK(r.stage1.static_ratio.has_value());
    CHECK_FALSE(r.stage1.silence_ratio.has_value());
    CHECK_FALSE(r.stage1.flux_variance.has_value());
  }
  SUBCASE("tone is low flux and never reaches the detector") {
    spec.audio = fixtures::AudioKind::Tone;
    const auto r = run_stage1(sample_of(spec), cfg, ThrowingVad{});
    CHECK(r.stage1.reject_reason == RejectReason::LowFlux);
    CHECK_FALSE(r.stage1.speech_ratio.has_value());
  }
  SUBCASE("detector failure is its own reject reason") {
    const auto r = run_stage1(sample_of(spec), cfg, ThrowingVad{});
    CHECK(r.stage1.reject_reason == RejectReason::VadError);
  }
  SUBCASE("a designed pass passes with every metric present") {
    const auto r = run_stage1(sample_of(spec), cfg, vad);
    CHECK(r.stage1.pass);
    CHECK_FALSE(r.stage1.reject_reason.has_value());
    CHECK(r.stage1.speech_ratio.has_value());
    CHECK(r.stage1.duration_ok);
    CHECK(r.stage1.streams_ok);
  }
  SUBCASE("duration is checked before streams") {
    spec.duration_s = 201.0;
    spec.fps = 0.5;
    spec.width = 8;
    spec.height = 8;
    spec.audio = fixtures::AudioKind::None;
    const auto r = run_stage1(sample_of(spec), cfg, vad);
    CHECK(r.stage1.reject_reason == RejectReason::TooLong);
    CHECK_FALSE(r.stage1.duration_ok);
  }
  SUBCASE("thresholds are configurable") {
    FilterConfig loose = cfg;
    loose.vad_min = 0.0;
    loose.vad_max = 0.01;
    const auto r = run_stage1(sample_of(spec), loose, vad);
    CHECK(r.stage1.reject_reason == RejectReason::VadOutOfBounds);
  }
}

TEST_CASE("boundary duration of exactly d_max passes the gate") {
  FilterConfig cfg;
  cfg.d_max_s = 10.0;
  fixtures::FixtureSpec spec;
  spec.name = "edge";
  spec.duration_s = 10.0;
  const auto r = run_stage1(sample_of(spec), cfg, EnergyVad{});
  CHECK(r.stage1.duration_ok);
  CHECK(r.stage1.reject_reason != RejectReason::TooLong);
}

TEST_CASE("file-level stage 1 maps unreadable input to INVALID") {
  const fs::path dir = fs::temp_directory_path() / "omnijigsaw_test_filter";
  fs::create_directories(dir);
  const fs::path bad = dir / "bad.ojm";
  { std::ofstream(bad, std::ios::binary) << "garbage"; }
  const RawMediaDecoder dec;
  const auto r = run_stage1(bad, dec, FilterConfig{}, EnergyVad{});
  CHECK(r.stage1.reject_reason == RejectReason::Invalid);
  CHECK(r.sample_id == "bad");

  fixtures::FixtureSpec spec;
  spec.name = "good";
  spec.duration_s = 20.0;
  const fs::path good = dir / "good.ojm";
  write_raw_media(good, sample_of(spec));
  std::optional<OmniSample> decoded;
  const auto ok = run_stage1(good, dec, FilterConfig{}, EnergyVad{}, &decoded);
  CHECK(ok.stage1.pass);
  REQUIRE(decoded.has_value());
  CHECK(decoded->id == "good");
}

TEST_CASE("config validation") {
  FilterConfig c;
  CHECK_NOTHROW(c.validate());
  c.vad_min = 0.9;
  CHECK_THROWS_AS(c.validate(), Error);
  c = FilterConfig{};
  c.min_flux_variance = std::nan("");
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("standardizer copies through without a transcoder") {
  const fs::path dir = fs::temp_directory_path() / "omnijigsaw_test_std";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path src = dir / "in.ojm";
  { std::ofstream(src, std::ios::binary) << "payload"; }
  const Standardizer s("definitely-not-a-transcoder");
  CHECK_FALSE(s.transcoder_available());
  const fs::path out = s.standardize(src, dir / "out");
  CHECK(fs::exists(out));
  CHECK(fs::file_size(out) == fs::file_size(src));
}
