#include "omnijigsaw/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "omnijigsaw/media.hpp"

namespace omnijigsaw::fixtures {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  float noise(double amplitude) { return static_cast<float>(amplitude * (2.0 * uniform() - 1.0)); }

 private:
  std::mt19937_64 eng_;
};

std::size_t n_samples(double duration_s, int rate) {
  return static_cast<std::size_t>(std::llround(duration_s * rate));
}

std::vector<double> frame_times(double duration_s, double fps) {
  std::vector<double> out;
  for (std::size_t m = 0;; ++m) {
    const double t = static_cast<double>(m) / fps;
    if (t >= duration_s) break;
    out.push_back(t);
  }
  return out;
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Adds one voiced syllable train over [t0, t1).
void add_speech_span(std::vector<float>& x, int rate, double t0, double t1, Rng& rng) {
  const double f0 = rng.uniform(110.0, 210.0);
  double phase[10];
  for (double& p : phase) p = rng.uniform(0.0, kTwoPi);
  const std::size_t e = std::min(x.size(), n_samples(t1, rate));
  double syllable = t0;
  while (syllable < t1) {
    const double next = syllable + rng.uniform(0.18, 0.32);
    const std::size_t a = n_samples(syllable, rate);
    const std::size_t b = std::min(e, n_samples(std::min(next, t1), rate));
    for (std::size_t i = a; i < b; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double local = t - syllable;
      const double env = 0.2 + 0.8 * std::exp(-local / 0.1);
      double v = 0.0;
      for (int k = 1; k <= 10; ++k) v += (0.2 / k) * std::sin(kTwoPi * k * f0 * t + phase[k - 1]);
      v *= env;
      if (local < 0.025) v += rng.noise(0.5);
      x[i] = static_cast<float>(v);
    }
    syllable = next;
  }
}

// Active spans covering `activity` of the timeline; `fill` is called for gaps.
template <typename Gap>
std::vector<float> spans(double duration_s, int rate, double activity, Rng& rng, Gap fill) {
  std::vector<float> x(n_samples(duration_s, rate), 0.0f);
  double t = rng.uniform(0.3, 1.0);
  fill(x, 0.0, t);
  while (t < duration_s) {
    const double active = rng.uniform(0.8, 2.0);
    const double gap = active * (1.0 - activity) / activity;
    add_speech_span(x, rate, t, std::min(duration_s, t + active), rng);
    fill(x, t + active, std::min(duration_s, t + active + gap));
    t += active + gap;
  }
  return x;
}

}  // namespace

std::vector<Frame> dynamic_video(double duration_s, double fps, int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  const double ph_r = rng.uniform(0.0, 1.0);
  const double ph_g = rng.uniform(0.0, 1.0);
  const double vr = rng.uniform(0.3, 0.45);
  const double vg = rng.uniform(0.25, 0.4);
  std::vector<Frame> out;
  for (double t : frame_times(duration_s, fps)) {
    Frame f;
    f.width = width;
    f.height = height;
    f.timestamp_s = t;
    f.rgb.resize(static_cast<std::size_t>(width) * height * 3);
    const int block = std::max(4, width / 5);
    const int bx = static_cast<int>((0.5 + 0.45 * std::sin(0.9 * t + ph_r * kTwoPi)) * (width - block));
    const int by = static_cast<int>((0.5 + 0.45 * std::cos(0.7 * t + ph_g * kTwoPi)) * (height - block));
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
        const bool in_block = x >= bx && x < bx + block && y >= by && y < by + block;
        if (in_block) {
          f.rgb[o] = f.rgb[o + 1] = f.rgb[o + 2] = 250;
          continue;
        }
        f.rgb[o] = clamp8(128 + 90 * std::sin(kTwoPi * (1.5 * x / width + vr * t + ph_r)));
        f.rgb[o + 1] = clamp8(128 + 90 * std::sin(kTwoPi * (1.2 * y / height - vg * t + ph_g)));
        f.rgb[o + 2] = clamp8(128 + 90 * std::sin(kTwoPi * (static_cast<double>(x + y) / (width + height) + 0.23 * t)));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Frame> static_video(double duration_s, double fps, int width, int height, std::uint64_t seed) {
  const std::vector<Frame> first = dynamic_video(1.0 / fps / 2.0, fps, width, height, seed);
  std::vector<Frame> out;
  for (double t : frame_times(duration_s, fps)) {
    Frame f = first.front();
    f.timestamp_s = t;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<float> speech_audio(double duration_s, int rate, double activity, std::uint64_t seed) {
  Rng rng(seed);
  return spans(duration_s, rate, activity, rng, [&](std::vector<float>& x, double a, double b) {
    for (std::size_t i = n_samples(a, rate); i < std::min(x.size(), n_samples(b, rate)); ++i) x[i] = rng.noise(0.01);
  });
}

std::vector<float> sparse_speech_audio(double duration_s, int rate, double activity, std::uint64_t seed) {
  Rng rng(seed);
  return spans(duration_s, rate, activity, rng, [](std::vector<float>&, double, double) {});
}

std::vector<float> tone_audio(double duration_s, int rate, double freq_hz, double amplitude) {
  std::vector<float> x(n_samples(duration_s, rate));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<float>(amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / rate));
  return x;
}

std::vector<float> noise_audio(double duration_s, int rate, double amplitude, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(n_samples(duration_s, rate));
  for (auto& v : x) v = rng.noise(amplitude);
  return x;
}

std::vector<float> percussive_audio(double duration_s, int rate, double activity, std::uint64_t seed) {
  Rng rng(seed);
  return spans(duration_s, rate, activity, rng, [&](std::vector<float>& x, double a, double b) {
    const std::size_t end = std::min(x.size(), n_samples(b, rate));
    for (std::size_t i = n_samples(a, rate); i < end; ++i) x[i] = rng.noise(0.01);
    for (double t = a + rng.uniform(0.05, 0.3); t < b; t += rng.uniform(0.3, 0.7)) {
      const std::size_t s = n_samples(t, rate);
      const std::size_t e = std::min(end, n_samples(t + 0.04, rate));
      for (std::size_t i = s; i < e; ++i) {
        const double local = static_cast<double>(i - s) / rate;
        x[i] = static_cast<float>(rng.noise(0.95) * std::exp(-local / 0.015));
      }
    }
  });
}

OmniSample make_sample(const FixtureSpec& spec, std::uint64_t seed) {
  OmniSample s;
  s.id = spec.name;
  s.duration_s = spec.duration_s;
  s.source_tag = "synthetic";
  if (spec.video != VideoKind::None) {
    s.has_video = true;
    s.video = spec.video == VideoKind::Dynamic ? dynamic_video(spec.duration_s, spec.fps, spec.width, spec.height, seed)
                                               : static_video(spec.duration_s, spec.fps, spec.width, spec.height, seed);
  }
  if (spec.audio != AudioKind::None) {
    s.has_audio = true;
    s.audio.sample_rate_hz = spec.sample_rate_hz;
    const int r = spec.sample_rate_hz;
    const std::uint64_t as = seed ^ 0xa0d10ULL;
    switch (spec.audio) {
      case AudioKind::Speech: s.audio.samples = speech_audio(spec.duration_s, r, spec.activity, as); break;
      case AudioKind::SparseSpeech: s.audio.samples = sparse_speech_audio(spec.duration_s, r, spec.activity, as); break;
      case AudioKind::Tone: s.audio.samples = tone_audio(spec.duration_s, r); break;
      case AudioKind::Noise: s.audio.samples = noise_audio(spec.duration_s, r, 0.3, as); break;
      case AudioKind::Percussive: s.audio.samples = percussive_audio(spec.duration_s, r, spec.activity, as); break;
      case AudioKind::None: break;
    }
  }
  return s;
}

std::vector<FixtureSpec> corpus_specs() {
  std::vector<FixtureSpec> out;
  for (int i = 1; i <= 10; ++i) {
    FixtureSpec s;
    s.name = "pass_" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    s.duration_s = 24.0 + 3.0 * i;
    s.activity = 0.45 + 0.015 * i;
    out.push_back(s);
  }
  auto reject = [&](std::string name, RejectReason why) -> FixtureSpec& {
    FixtureSpec s;
    s.name = std::move(name);
    s.expected = why;
    out.push_back(s);
    return out.back();
  };
  {
    auto& s = reject("reject_too_long", RejectReason::TooLong);
    s.duration_s = 250.0;
    s.fps = 1.0;
    s.width = 32;
    s.height = 32;
    s.sample_rate_hz = 8000;
  }
  reject("reject_no_audio", RejectReason::MissingStream).audio = AudioKind::None;
  reject("reject_no_video", RejectReason::MissingStream).video = VideoKind::None;
  reject("reject_static", RejectReason::StaticVideo).video = VideoKind::Static;
  {
    auto& s = reject("reject_silence", RejectReason::Silence);
    s.audio = AudioKind::SparseSpeech;
    s.activity = 0.15;
  }
  reject("reject_tone", RejectReason::LowFlux).audio = AudioKind::Tone;
  reject("reject_noise", RejectReason::LowFlux).audio = AudioKind::Noise;
  {
    auto& s = reject("reject_vad_low", RejectReason::VadOutOfBounds);
    s.audio = AudioKind::Percussive;
    s.activity = 0.12;
  }
  reject("reject_vad_high", RejectReason::VadOutOfBounds).activity = 0.97;
  reject("reject_corrupt", RejectReason::Invalid).corrupt = true;
  return out;
}

std::vector<FixtureLabel> gen_fixtures(const std::filesystem::path& dir, std::uint64_t seed) {
  const std::filesystem::path media_dir = dir / "synthetic";
  std::filesystem::create_directories(media_dir);
  std::vector<FixtureLabel> labels;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  std::uint64_t k = 0;
  for (const auto& spec : corpus_specs()) {
    const std::uint64_t s = seed * 1000003ULL + (k++);
    const std::filesystem::path file = media_dir / (spec.name + kRawMediaExtension);
    if (spec.corrupt) {
      Rng rng(s);
      std::ofstream out(file, std::ios::binary);
      for (int i = 0; i < 4096; ++i) out.put(static_cast<char>(rng.uniform() * 256.0));
    } else {
      write_raw_media(file, make_sample(spec, s));
    }
    FixtureLabel l;
    l.file = "synthetic/" + file.filename().string();
    l.sample_id = spec.name;
    l.expected_stage1 = spec.expected ? std::string(to_string(*spec.expected)) : "PASS";
    j.push_back({{"file", l.file}, {"sample_id", l.sample_id}, {"expected_stage1", l.expected_stage1}});
    labels.push_back(std::move(l));
  }
  std::ofstream(dir / "fixture_labels.json") << j.dump(2) << '\n';
  return labels;
}

OmniSample random_sample(std::mt19937_64& eng, const std::string& id) {
  Rng rng(eng());
  OmniSample s;
  s.id = id;
  s.duration_s = rng.uniform(6.5, 30.0);
  s.has_video = s.has_audio = true;
  const double fps = rng.uniform() < 0.5 ? 1.0 : 2.0;
  const int w = static_cast<int>(rng.uniform(56, 800));
  const int h = static_cast<int>(rng.uniform(56, 450));
  for (double t : frame_times(s.duration_s, fps)) {
    Frame f;
    f.width = w;
    f.height = h;
    f.timestamp_s = t;
    f.rgb.resize(static_cast<std::size_t>(w) * h * 3);
    const auto m = static_cast<unsigned>(t * 37.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c)
          f.rgb[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<std::uint8_t>(x * 3 + y * 2 + m + c * 50);
    s.video.push_back(std::move(f));
  }
  const int rates[] = {16000, 22050, 44100, 48000};
  s.audio.sample_rate_hz = rates[static_cast<int>(rng.uniform() * 4) % 4];
  s.audio.samples = noise_audio(s.duration_s, s.audio.sample_rate_hz, 0.2, eng());
  return s;
}

}  // namespace omnijigsaw::fixtures
