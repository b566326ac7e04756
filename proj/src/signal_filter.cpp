#include "omnijigsaw/signal_filter.hpp"

#include <spdlog/spdlog.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>

#include "omnijigsaw/audio.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/image.hpp"

namespace omnijigsaw {

MediaMeta probe_media(const std::filesystem::path& path, const MediaDecoder& decoder) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::Unreadable, "not a readable file: " + path.string());
  if (std::ifstream probe(path, std::ios::binary); !probe) throw Error(ErrorCode::Unreadable, "cannot open " + path.string());
  return decoder.probe(path);
}

std::vector<Frame> sample_at_interval(std::span<const Frame> video, double interval_s) {
  std::vector<Frame> out;
  if (video.empty() || !(interval_s > 0.0)) return out;
  const double t0 = video.front().timestamp_s;
  const double t_last = video.back().timestamp_s;
  std::size_t cursor = 0;
  std::optional<std::size_t> last_pick;
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * interval_s;
    if (t > t_last + 1e-9) break;
    while (cursor + 1 < video.size() &&
           std::abs(video[cursor + 1].timestamp_s - t) <= std::abs(video[cursor].timestamp_s - t))
      ++cursor;
    if (!last_pick || *last_pick != cursor) {
      out.push_back(video[cursor]);
      last_pick = cursor;
    }
  }
  return out;
}

double mean_abs_difference(const Frame& a, const Frame& b) {
  const auto ga = image::gray_thumbnail(a, kThumbnailSide);
  const auto gb = image::gray_thumbnail(b, kThumbnailSide);
  long long acc = 0;
  for (std::size_t i = 0; i < ga.size(); ++i) acc += std::abs(static_cast<int>(ga[i]) - static_cast<int>(gb[i]));
  return static_cast<double>(acc) / static_cast<double>(ga.size());
}

double static_ratio(std::span<const Frame> sampled, double mad_threshold) {
  if (sampled.size() < 2) return 1.0;
  std::vector<std::uint8_t> prev = image::gray_thumbnail(sampled[0], kThumbnailSide);
  std::size_t static_count = 0;
  for (std::size_t i = 1; i < sampled.size(); ++i) {
    auto cur = image::gray_thumbnail(sampled[i], kThumbnailSide);
    long long acc = 0;
    for (std::size_t p = 0; p < cur.size(); ++p) acc += std::abs(static_cast<int>(cur[p]) - static_cast<int>(prev[p]));
    const double mad = static_cast<double>(acc) / static_cast<double>(cur.size());
    if (mad < mad_threshold) ++static_count;
    prev = std::move(cur);
  }
  return static_cast<double>(static_count) / static_cast<double>(sampled.size() - 1);
}

double silence_ratio(std::span<const float> audio_16k, double rms_silence_db) {
  const auto rms = audio::frame_rms(audio_16k);
  if (rms.empty()) return 1.0;
  const double peak = *std::max_element(rms.begin(), rms.end());
  if (peak <= kDbEpsilon) return 1.0;
  std::size_t silent = 0;
  for (double r : rms) {
    const double db = 20.0 * std::log10(std::max(r, kDbEpsilon) / peak);
    if (db < rms_silence_db) ++silent;
  }
  return static_cast<double>(silent) / static_cast<double>(rms.size());
}

std::vector<double> onset_strength(std::span<const float> audio_16k) {
  const auto spec = audio::stft_magnitude(audio_16k);
  std::vector<double> env;
  if (spec.size() < 2) return env;
  env.reserve(spec.size() - 1);
  for (std::size_t t = 1; t < spec.size(); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < spec[t].size(); ++k) acc += std::max(0.0, spec[t][k] - spec[t - 1][k]);
    env.push_back(acc / static_cast<double>(spec[t].size()));
  }
  return env;
}

double flux_variance(std::span<const float> audio_16k) {
  const auto env = onset_strength(audio_16k);
  if (env.empty()) return 0.0;
  double mean = 0.0;
  for (double v : env) mean += v;
  mean /= static_cast<double>(env.size());
  double var = 0.0;
  for (double v : env) var += (v - mean) * (v - mean);
  return var / static_cast<double>(env.size());
}

std::vector<SpeechSegment> EnergyVad::segments(std::span<const float> audio, int sample_rate_hz) const {
  std::vector<SpeechSegment> out;
  if (audio.empty() || sample_rate_hz <= 0) return out;
  const auto frame_len = static_cast<std::size_t>(std::max(1.0, std::round(config_.frame_ms * sample_rate_hz / 1000.0)));
  const std::size_t n_frames = (audio.size() + frame_len - 1) / frame_len;
  std::vector<double> rms(n_frames, 0.0);
  std::vector<double> zcr(n_frames, 0.0);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t b = f * frame_len;
    const std::size_t e = std::min(b + frame_len, audio.size());
    double acc = 0.0;
    std::size_t crossings = 0;
    for (std::size_t i = b; i < e; ++i) {
      acc += static_cast<double>(audio[i]) * audio[i];
      if (i > b && ((audio[i] >= 0.0f) != (audio[i - 1] >= 0.0f))) ++crossings;
    }
    rms[f] = std::sqrt(acc / static_cast<double>(e - b));
    zcr[f] = e - b > 1 ? static_cast<double>(crossings) / static_cast<double>(e - b - 1) : 0.0;
  }
  const double peak = *std::max_element(rms.begin(), rms.end());
  if (peak <= kDbEpsilon) return out;

  std::vector<bool> active(n_frames, false);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double rel = 20.0 * std::log10(std::max(rms[f], kDbEpsilon) / peak);
    const double abs_db = 20.0 * std::log10(std::max(rms[f], kDbEpsilon));
    active[f] = rel > config_.relative_db && abs_db > config_.absolute_db && zcr[f] >= config_.zcr_min &&
                zcr[f] <= config_.zcr_max;
  }

  const double frame_s = static_cast<double>(frame_len) / sample_rate_hz;
  const double total_s = static_cast<double>(audio.size()) / sample_rate_hz;
  std::vector<SpeechSegment> raw;
  for (std::size_t f = 0; f < n_frames;) {
    if (!active[f]) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g < n_frames && active[g]) ++g;
    raw.push_back({static_cast<double>(f) * frame_s, std::min(total_s, static_cast<double>(g) * frame_s)});
    f = g;
  }
  for (const auto& seg : raw) {
    if (!out.empty() && (seg.start_s - out.back().end_s) * 1000.0 < config_.max_gap_ms) {
      out.back().end_s = seg.end_s;
    } else {
      out.push_back(seg);
    }
  }
  std::erase_if(out, [&](const SpeechSegment& s) { return (s.end_s - s.start_s) * 1000.0 < config_.min_speech_ms; });
  return out;
}

double speech_ratio(std::span<const float> audio_16k, int sample_rate_hz, double duration_s,
                    const SpeechActivityDetector& detector) {
  std::vector<SpeechSegment> segs;
  try {
    segs = detector.segments(audio_16k, sample_rate_hz);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::DetectorFailure, std::string("speech detector failed: ") + e.what());
  }
  if (!(duration_s > 0.0)) return 0.0;
  std::sort(segs.begin(), segs.end(), [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  double total = 0.0;
  double covered_until = 0.0;
  for (const auto& s : segs) {
    const double b = std::clamp(std::max(s.start_s, covered_until), 0.0, duration_s);
    const double e = std::clamp(s.end_s, 0.0, duration_s);
    if (e > b) {
      total += e - b;
      covered_until = e;
    }
  }
  return std::clamp(total / duration_s, 0.0, 1.0);
}

namespace {

FilterReport reject(FilterReport r, RejectReason reason) {
  r.stage1.pass = false;
  r.stage1.reject_reason = reason;
  return r;
}

// Checks after the duration/stream gate.
FilterReport run_content_checks(FilterReport r, const OmniSample& sample, const FilterConfig& config,
                                const SpeechActivityDetector& detector) {
  const auto sampled = sample_at_interval(sample.video, config.frame_interval_s);
  r.stage1.static_ratio = static_ratio(sampled, config.mad_threshold);
  if (*r.stage1.static_ratio > config.max_static_ratio) return reject(std::move(r), RejectReason::StaticVideo);

  const std::vector<float> a16 =
      audio::resample(sample.audio.samples, sample.audio.sample_rate_hz, config.sample_rate_hz);
  r.stage1.silence_ratio = silence_ratio(a16, config.rms_silence_db);
  if (*r.stage1.silence_ratio > config.max_silence_ratio) return reject(std::move(r), RejectReason::Silence);

  r.stage1.flux_variance = flux_variance(a16);
  if (*r.stage1.flux_variance < config.min_flux_variance) return reject(std::move(r), RejectReason::LowFlux);

  try {
    r.stage1.speech_ratio = speech_ratio(a16, config.sample_rate_hz, sample.duration_s, detector);
  } catch (const Error&) {
    return reject(std::move(r), RejectReason::VadError);
  }
  if (*r.stage1.speech_ratio < config.vad_min || *r.stage1.speech_ratio > config.vad_max)
    return reject(std::move(r), RejectReason::VadOutOfBounds);

  r.stage1.pass = true;
  r.stage1.reject_reason.reset();
  return r;
}

FilterReport gate(const std::string& id, double duration_s, bool has_video, bool has_audio, const FilterConfig& config,
                  bool& proceed) {
  FilterReport r;
  r.sample_id = id;
  r.stage1.duration_s = duration_s;
  r.stage1.duration_ok = duration_s > 0.0 && duration_s <= config.d_max_s;
  r.stage1.streams_ok = has_video && has_audio;
  proceed = false;
  if (duration_s > config.d_max_s) return reject(std::move(r), RejectReason::TooLong);
  if (!r.stage1.streams_ok) return reject(std::move(r), RejectReason::MissingStream);
  if (!(duration_s > 0.0)) return reject(std::move(r), RejectReason::Invalid);
  proceed = true;
  return r;
}

}  // namespace

FilterReport run_stage1(const OmniSample& sample, const FilterConfig& config, const SpeechActivityDetector& detector) {
  bool proceed = false;
  FilterReport r = gate(sample.id, sample.duration_s, sample.has_video && !sample.video.empty(),
                        sample.has_audio && !sample.audio.samples.empty(), config, proceed);
  if (!proceed) return r;
  return run_content_checks(std::move(r), sample, config, detector);
}

FilterReport run_stage1(const std::filesystem::path& path, const MediaDecoder& decoder, const FilterConfig& config,
                        const SpeechActivityDetector& detector, std::optional<OmniSample>* decoded) {
  const std::string id = path.stem().string();
  MediaMeta meta;
  try {
    meta = probe_media(path, decoder);
  } catch (const std::exception& e) {
    spdlog::debug("probe failed for {}: {}", path.string(), e.what());
    FilterReport r;
    r.sample_id = id;
    return reject(std::move(r), RejectReason::Invalid);
  }
  bool proceed = false;
  FilterReport r = gate(id, meta.duration_s, meta.has_video, meta.has_audio, config, proceed);
  if (!proceed) return r;
  OmniSample sample;
  try {
    sample = decoder.decode(path, {});
    sample.id = id;
    validate(sample);
  } catch (const std::exception& e) {
    spdlog::debug("decode failed for {}: {}", path.string(), e.what());
    return reject(std::move(r), RejectReason::Invalid);
  }
  r = run_content_checks(std::move(r), sample, config, detector);
  if (decoded) *decoded = std::move(sample);
  return r;
}

namespace {

std::string find_executable(const std::string& name) {
  if (name.empty()) return {};
  if (name.find('/') != std::string::npos) return ::access(name.c_str(), X_OK) == 0 ? name : std::string{};
  const char* path_env = std::getenv("PATH");
  if (!path_env) return {};
  std::string_view rest(path_env);
  while (!rest.empty()) {
    const auto colon = rest.find(':');
    const std::string dir(rest.substr(0, colon));
    const std::string candidate = (dir.empty() ? "." : dir) + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  return {};
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  return out + "'";
}

}  // namespace

bool Standardizer::transcoder_available() const { return !find_executable(transcoder_).empty(); }

std::filesystem::path Standardizer::standardize(const std::filesystem::path& input,
                                                const std::filesystem::path& out_dir) const {
  std::filesystem::create_directories(out_dir);
  const std::string exe = find_executable(transcoder_);
  if (!exe.empty()) {
    const auto target = out_dir / (input.stem().string() + ".mp4");
    const std::string cmd = shell_quote(exe) + " -y -loglevel error -i " + shell_quote(input.string()) +
                            " -c:v libx264 -pix_fmt yuv420p -c:a aac -movflags +faststart " +
                            shell_quote(target.string());
    if (std::system(cmd.c_str()) == 0) return target;
    spdlog::warn("transcoder failed for {}; copying source through", input.string());
  } else {
    static std::once_flag warned;
    std::call_once(warned, [] { spdlog::warn("no transcoder available; sources are copied through unchanged"); });
  }
  const auto target = out_dir / input.filename();
  std::filesystem::copy_file(input, target, std::filesystem::copy_options::overwrite_existing);
  return target;
}

}  // namespace omnijigsaw
