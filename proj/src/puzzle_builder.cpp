#include "omnijigsaw/puzzle_builder.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"
#include "omnijigsaw/audio.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/image.hpp"
#include "omnijigsaw/prompts.hpp"
#include "omnijigsaw/response_parser.hpp"

namespace omnijigsaw {

void BuildConfig::validate() const {
  if (n_clips < 2) throw Error(ErrorCode::Config, "n_clips must be at least 2");
  if (!(trim_ratio >= 0.0 && trim_ratio < 0.5)) throw Error(ErrorCode::Config, "trim_ratio must be in [0, 0.5)");
  if (!(target_fps > 0.0) || !(judge_fps > 0.0)) throw Error(ErrorCode::Config, "frame rates must be positive");
  if (min_frames < 1 || min_frames > max_frames) throw Error(ErrorCode::Config, "need 1 <= min_frames <= max_frames");
  if (patch < 1 || pixel_budget < static_cast<std::size_t>(patch) * static_cast<std::size_t>(patch))
    throw Error(ErrorCode::Config, "pixel_budget must hold at least one patch");
  if (audio_rate_hz <= 0) throw Error(ErrorCode::Config, "audio_rate_hz must be positive");
  if (judge_max_frames < 1) throw Error(ErrorCode::Config, "judge_max_frames must be positive");
  if (!(min_clip_s > 0.0) || !(max_audio_s > 0.0)) throw Error(ErrorCode::Config, "durations must be positive");
  if (selector_retries < 0) throw Error(ErrorCode::Config, "selector_retries must be non-negative");
}

namespace {

std::vector<float> to_rate(const Waveform& w, int rate) {
  if (w.sample_rate_hz == rate) return w.samples;
  return audio::resample(w.samples, w.sample_rate_hz, rate);
}

const Frame& nearest_frame(std::span<const Frame> frames, double t) {
  auto it = std::lower_bound(frames.begin(), frames.end(), t,
                             [](const Frame& f, double v) { return f.timestamp_s < v; });
  if (it == frames.end()) return frames.back();
  if (it == frames.begin()) return *it;
  const auto prev = std::prev(it);
  return (t - prev->timestamp_s) <= (it->timestamp_s - t) ? *prev : *it;
}

std::vector<double> linspace(double a, double b, int k) {
  std::vector<double> out(static_cast<std::size_t>(k));
  if (k == 1) {
    out[0] = a;
    return out;
  }
  for (int m = 0; m < k; ++m) out[static_cast<std::size_t>(m)] = a + (b - a) * m / (k - 1);
  return out;
}

}  // namespace

std::vector<Clip> segment_and_trim(const OmniSample& sample, const BuildConfig& config) {
  const int n = config.n_clips;
  if (n < 2) throw Error(ErrorCode::NTooSmall, "n_clips must be at least 2");
  if (!sample.has_video || !sample.has_audio || sample.video.empty() || sample.audio.samples.empty())
    throw Error(ErrorCode::InvalidArgument, "segmentation needs both streams");
  if (sample.duration_s < n * config.min_clip_s)
    throw Error(ErrorCode::TooShort, "sample of " + std::to_string(sample.duration_s) + " s is too short for " +
                                         std::to_string(n) + " clips");

  const int sr = config.audio_rate_hz;
  const std::vector<float> pcm = to_rate(sample.audio, sr);
  const auto total = static_cast<std::int64_t>(pcm.size());

  std::vector<std::int64_t> a0(static_cast<std::size_t>(n));
  std::int64_t shortest = std::numeric_limits<std::int64_t>::max();
  for (int i = 0; i < n; ++i) {
    const std::int64_t b = i * total / n;
    const std::int64_t e = (i + 1) * total / n;
    const auto trim = static_cast<std::int64_t>(std::llround(config.trim_ratio * static_cast<double>(e - b)));
    a0[static_cast<std::size_t>(i)] = b + trim;
    shortest = std::min(shortest, e - trim - (b + trim));
  }
  if (shortest <= 0) throw Error(ErrorCode::TooShort, "trimmed clips are empty");

  std::vector<Clip> clips;
  clips.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Clip c;
    c.orig_index = i + 1;
    const auto start = a0[static_cast<std::size_t>(i)];
    c.start_s = static_cast<double>(start) / sr;
    c.duration_s = static_cast<double>(shortest) / sr;
    c.audio.assign(pcm.begin() + start, pcm.begin() + start + shortest);
    const double end_s = c.start_s + c.duration_s;
    for (const auto& f : sample.video) {
      if (f.timestamp_s >= c.start_s && f.timestamp_s <= end_s) c.frames.push_back(f);
    }
    if (c.frames.empty()) c.frames.push_back(nearest_frame(sample.video, c.start_s + c.duration_s / 2));
    clips.push_back(std::move(c));
  }
  return clips;
}

Clip downsample_frames(const Clip& clip, const BuildConfig& config) {
  if (clip.frames.empty()) throw Error(ErrorCode::InvalidArgument, "clip has no frames");
  const auto wanted = static_cast<int>(std::lround(clip.duration_s * config.target_fps));
  const int k = std::clamp(wanted, config.min_frames, config.max_frames);
  Clip out = clip;
  out.frames.clear();
  for (double t : linspace(clip.start_s, clip.start_s + clip.duration_s, k)) {
    Frame f = nearest_frame(clip.frames, t);
    f.timestamp_s = t;
    out.frames.push_back(std::move(f));
  }
  return out;
}

std::pair<int, int> rescale_dims(int width, int height, std::size_t pixel_budget, int patch) {
  const double area = static_cast<double>(width) * height;
  const double scale = area > static_cast<double>(pixel_budget) ? std::sqrt(pixel_budget / area) : 1.0;
  auto fit = [&](int d) { return std::max(patch, static_cast<int>(std::floor(d * scale / patch)) * patch); };
  int w = fit(width);
  int h = fit(height);
  const auto budget = static_cast<std::int64_t>(pixel_budget);
  if (static_cast<std::int64_t>(w) * h > budget) {
    if (w >= h) w = std::max(patch, static_cast<int>(budget / h / patch) * patch);
    else h = std::max(patch, static_cast<int>(budget / w / patch) * patch);
  }
  return {w, h};
}

std::vector<Frame> rescale_frames(std::span<const Frame> frames, std::size_t pixel_budget, int patch) {
  std::vector<Frame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    const auto [w, h] = rescale_dims(f.width, f.height, pixel_budget, patch);
    out.push_back(w == f.width && h == f.height ? f : image::resize_bilinear(f, w, h));
  }
  return out;
}

namespace {

// Unbiased draw from [0, range) on raw engine output.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  const std::uint64_t threshold = (0 - range) % range;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % range;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Permutation sample_permutation(int n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::NTooSmall, "permutation needs n >= 2");
  std::mt19937_64 rng(seed);
  std::vector<int> a(static_cast<std::size_t>(n));
  std::iota(a.begin(), a.end(), 1);
  for (std::size_t i = a.size() - 1; i > 0; --i) std::swap(a[i], a[bounded(rng, i + 1)]);
  return Permutation(std::move(a));
}

std::uint64_t derive_seed(std::uint64_t corpus_seed, std::string_view sample_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(corpus_seed ^ splitmix64(h));
}

PuzzleInstance shuffle_and_orchestrate(std::string sample_id, std::vector<Clip> clips, const Permutation& permutation,
                                       Strategy strategy, std::optional<Modality> dominance,
                                       std::optional<std::vector<ClipModality>> modality_vector) {
  if (static_cast<int>(clips.size()) != permutation.size())
    throw Error(ErrorCode::InvalidArgument, "permutation size does not match clip count");
  if (strategy == Strategy::Sms && !dominance)
    throw Error(ErrorCode::MissingDominance, "SMS needs a dominance decision");
  if (strategy == Strategy::Cmm && (!modality_vector || modality_vector->size() != clips.size()))
    throw Error(ErrorCode::VectorLengthMismatch, "CMM needs one modality per clip");

  auto keep = [](Clip& c, bool video, bool audio) {
    c.video_present = video;
    c.audio_present = audio;
    if (!video) c.frames.clear();
    if (!audio) c.audio.clear();
  };
  for (std::size_t i = 0; i < clips.size(); ++i) {
    Clip& c = clips[i];
    switch (strategy) {
      case Strategy::Jmi: keep(c, true, true); break;
      case Strategy::Sms: keep(c, *dominance == Modality::V, *dominance == Modality::A); break;
      case Strategy::Cmm: {
        const ClipModality m = (*modality_vector)[i];
        keep(c, m != ClipModality::A, m != ClipModality::V);
        break;
      }
      case Strategy::Video: keep(c, true, false); break;
      case Strategy::Audio: keep(c, false, true); break;
    }
  }

  PuzzleInstance p;
  p.sample_id = std::move(sample_id);
  p.n_clips = permutation.size();
  p.strategy = strategy;
  p.shuffled_clips = shuffle_by<Clip>(clips, permutation);
  p.permutation = permutation;
  if (strategy == Strategy::Sms) p.dominance = dominance;
  if (strategy == Strategy::Cmm) p.modality_vector = std::move(modality_vector);
  p.prompt_id = std::string(prompts::rollout_prompt_id(strategy, p.dominance));
  return p;
}

Modality parse_dominance_answer(std::string_view raw) {
  const auto block = text::answer_after_reasoning(raw);
  if (!block) throw Error(ErrorCode::UnparseableDominance, "no answer block");
  const auto tok = text::trim(*block);
  if (tok == "V" || tok == "v") return Modality::V;
  if (tok == "A" || tok == "a") return Modality::A;
  throw Error(ErrorCode::UnparseableDominance, "dominance answer '" + std::string(tok) + "' is not V or A");
}

std::vector<ClipModality> parse_modality_vector(std::string_view raw, int n) {
  const auto block = text::answer_after_reasoning(raw);
  if (!block) throw Error(ErrorCode::InvalidJson, "no answer block");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::trim(*block));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidJson, std::string("selector answer is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("modalities") || !j["modalities"].is_array())
    throw Error(ErrorCode::InvalidJson, "selector answer lacks a modalities array");
  const auto& arr = j["modalities"];
  if (static_cast<int>(arr.size()) != n)
    throw Error(ErrorCode::BadLength, "expected " + std::to_string(n) + " modalities, got " + std::to_string(arr.size()));
  std::vector<ClipModality> out;
  for (const auto& v : arr) {
    const auto m = v.is_string() ? parse_clip_modality(v.get<std::string>()) : std::nullopt;
    if (!m) throw Error(ErrorCode::BadToken, "bad modality token " + v.dump());
    out.push_back(*m);
  }
  if (std::all_of(out.begin(), out.end(), [&](ClipModality m) { return m == out.front(); }))
    spdlog::warn("selector returned a degenerate modality vector (all {})", to_string(out.front()));
  return out;
}

DominanceContext build_dominance_context(const OmniSample& sample, const BuildConfig& config) {
  DominanceContext ctx;
  if (!sample.video.empty()) {
    const auto per_fps = static_cast<int>(std::floor(sample.duration_s * config.judge_fps));
    const int n = std::min(std::max(1, per_fps), config.judge_max_frames);
    for (double t : linspace(sample.video.front().timestamp_s, sample.video.back().timestamp_s, n)) {
      Frame f = nearest_frame(sample.video, t);
      f.timestamp_s = t;
      ctx.frames.push_back(std::move(f));
    }
  }
  ctx.audio = to_rate(sample.audio, config.audio_rate_hz);
  return ctx;
}

std::vector<float> extract_audio_for_frames(const Waveform& audio, std::span<const double> frame_timestamps,
                                            double max_audio_s) {
  if (audio.samples.empty()) throw Error(ErrorCode::NoAudioStream, "sample has no audio");
  if (frame_timestamps.empty()) return {};
  const double sr = audio.sample_rate_hz;
  const auto total = static_cast<std::int64_t>(audio.samples.size());
  auto copy = [&](std::int64_t start, std::int64_t len, std::vector<float>& out) {
    for (std::int64_t i = start; i < start + len; ++i) out.push_back(i >= 0 && i < total ? audio.samples[static_cast<std::size_t>(i)] : 0.0f);
  };
  const double first = frame_timestamps.front();
  const double last = frame_timestamps.back();
  std::vector<float> out;
  if (last - first <= max_audio_s) {
    const double mid = (first + last) / 2.0;
    const double half = (last - first) / 2.0;
    const auto start = static_cast<std::int64_t>(std::llround((mid - half) * sr));
    const auto len = static_cast<std::int64_t>(std::llround((last - first) * sr));
    copy(start, len, out);
    return out;
  }
  const double chunk = max_audio_s / static_cast<double>(frame_timestamps.size());
  const auto len = static_cast<std::int64_t>(std::llround(chunk * sr));
  out.reserve(static_cast<std::size_t>(len) * frame_timestamps.size());
  for (double t : frame_timestamps) copy(static_cast<std::int64_t>(std::llround((t - chunk / 2.0) * sr)), len, out);
  return out;
}

std::vector<Frame> uniform_frames(std::span<const Frame> video, std::size_t max_frames) {
  if (video.size() <= max_frames || max_frames == 0) return {video.begin(), video.end()};
  std::vector<Frame> out;
  out.reserve(max_frames);
  for (std::size_t m = 0; m < max_frames; ++m) {
    const double pos = max_frames == 1 ? 0.0 : static_cast<double>(m) * (video.size() - 1) / (max_frames - 1);
    out.push_back(video[static_cast<std::size_t>(std::llround(pos))]);
  }
  return out;
}

namespace {

template <typename Parse>
auto ask_with_retry(InferenceClient& client, const ChatRequest& req, const InferenceConfig& inference, int retries,
                    Parse parse) -> std::optional<decltype(parse(std::string_view{}))> {
  for (int attempt = 0; attempt <= retries; ++attempt) {
    const std::string raw = complete_with_retries(client, req, inference.retries, inference.retry_backoff_s);
    try {
      return parse(raw);
    } catch (const Error& e) {
      spdlog::warn("{}: attempt {}: {} ({})", req.tag, attempt + 1, e.what(), to_string(e.code()));
    }
  }
  return std::nullopt;
}

}  // namespace

Modality judge_dominance(const OmniSample& sample, const BuildConfig& config, InferenceClient& client,
                         const InferenceConfig& inference) {
  DominanceContext ctx = build_dominance_context(sample, config);
  MediaItem item;
  item.frames = rescale_frames(ctx.frames, config.pixel_budget, config.patch);
  item.fps = sample.duration_s > 0.0 ? std::min(config.judge_fps, item.frames.size() / sample.duration_s)
                                     : config.judge_fps;
  item.audio = std::move(ctx.audio);
  const ChatRequest req = assemble_request(prompts::render(prompts::kSmsJudge, config.n_clips), {item},
                                           "judge:" + sample.id);
  const auto m = ask_with_retry(client, req, inference, config.selector_retries, parse_dominance_answer);
  if (m) return *m;
  spdlog::warn("judge:{}: falling back to dominance V", sample.id);
  return Modality::V;
}

std::vector<ClipModality> select_modalities(std::span<const Clip> clips, const BuildConfig& config,
                                            InferenceClient& client, const InferenceConfig& inference,
                                            const std::string& tag) {
  const int n = static_cast<int>(clips.size());
  std::vector<MediaItem> media;
  for (const auto& c : clips) {
    MediaItem item;
    item.frames = c.frames;
    item.fps = c.duration_s > 0.0 ? c.frames.size() / c.duration_s : config.target_fps;
    item.audio = c.audio;
    media.push_back(std::move(item));
  }
  const ChatRequest req = assemble_request(prompts::render(prompts::kCmmSelector, n), media, "select:" + tag);
  const auto v = ask_with_retry(client, req, inference, config.selector_retries,
                                [n](std::string_view raw) { return parse_modality_vector(raw, n); });
  if (v) return *v;
  spdlog::warn("select:{}: falling back to all VA", tag);
  return std::vector<ClipModality>(clips.size(), ClipModality::VA);
}

PuzzleInstance build_puzzle(const OmniSample& sample, Strategy strategy, const BuildConfig& config,
                            InferenceClient* client, const InferenceConfig& inference) {
  std::vector<Clip> clips = segment_and_trim(sample, config);
  for (auto& c : clips) {
    c = downsample_frames(c, config);
    c.frames = rescale_frames(c.frames, config.pixel_budget, config.patch);
  }

  std::optional<Modality> dominance;
  std::optional<std::vector<ClipModality>> modalities;
  if (strategy == Strategy::Sms || strategy == Strategy::Cmm) {
    if (!client) throw Error(ErrorCode::InvalidArgument, "strategy needs an inference client");
    if (strategy == Strategy::Sms) dominance = judge_dominance(sample, config, *client, inference);
    else modalities = select_modalities(clips, config, *client, inference, sample.id);
  }

  const std::uint64_t seed = derive_seed(config.rng_seed, sample.id);
  PuzzleInstance p = shuffle_and_orchestrate(sample.id, std::move(clips), sample_permutation(config.n_clips, seed),
                                             strategy, dominance, std::move(modalities));
  p.rng_seed = seed;
  return p;
}

}  // namespace omnijigsaw
