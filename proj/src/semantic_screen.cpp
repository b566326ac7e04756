#include "omnijigsaw/semantic_screen.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include "omnijigsaw/audio.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/prompts.hpp"
#include "omnijigsaw/puzzle_builder.hpp"
#include "omnijigsaw/response_parser.hpp"

namespace omnijigsaw {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
         });
}

}  // namespace

ScreeningVerdict parse_verdict(std::string_view raw) {
  ScreeningVerdict v;
  v.raw = std::string(raw);
  std::size_t think_end = 0;
  const auto think = text::find_block(raw, "think", 0, &think_end);
  if (think) v.think_text = std::string(text::trim(*think));
  const auto answer = text::find_block(raw, "answer", think ? think_end : 0);
  if (!think || !answer) return v;
  v.coherent = v.think_text.size() >= kMinThinkChars;
  if (iequals(text::trim(*answer), "YES")) v.decision = Decision::Yes;
  return v;
}

ChatRequest screening_request(const OmniSample& sample, const InferenceConfig& config) {
  MediaItem item;
  const auto frames = uniform_frames(sample.video, config.max_frames);
  item.frames = rescale_frames(frames, config.max_pixels, 28);
  item.fps = sample.duration_s > 0.0 ? item.frames.size() / sample.duration_s : 1.0;
  if (config.include_audio && sample.has_audio) {
    Waveform w = sample.audio;
    if (w.sample_rate_hz != 16000) {
      w.samples = audio::resample(w.samples, w.sample_rate_hz, 16000);
      w.sample_rate_hz = 16000;
    }
    std::vector<double> ts;
    for (const auto& f : item.frames) ts.push_back(f.timestamp_s);
    item.audio = extract_audio_for_frames(w, ts);
  }
  std::string text(prompts::asset(prompts::kSemanticScreening));
  return assemble_request(text, {item}, "screen:" + sample.id);
}

std::string query_assessor(const OmniSample& sample, const InferenceConfig& config, InferenceClient& client) {
  return complete_with_retries(client, screening_request(sample, config), config.retries, config.retry_backoff_s);
}

Stage2Report screen_sample(const OmniSample& sample, const InferenceConfig& config, InferenceClient& client) {
  Stage2Report r;
  std::string raw;
  try {
    raw = query_assessor(sample, config, client);
  } catch (const Error& e) {
    spdlog::warn("screen:{}: deferred after {} attempts: {}", sample.id, config.retries + 1, e.what());
    r.deferred = true;
    return r;
  }
  const ScreeningVerdict v = parse_verdict(raw);
  r.think_text = v.think_text;
  r.decision = v.decision;
  r.coherent = v.coherent;
  r.pass = v.retained();
  if (!r.pass) r.reject_reason = RejectReason::SemanticNo;
  return r;
}

std::vector<Stage2Report> run_stage2(std::span<const OmniSample> samples, const InferenceConfig& config,
                                     InferenceClient& client, int workers) {
  std::vector<Stage2Report> out(samples.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) out[i] = screen_sample(samples[i], config, client);
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(samples.size())));
  std::vector<std::jthread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  return out;
}

}  // namespace omnijigsaw
