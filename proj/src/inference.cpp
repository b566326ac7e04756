#include "omnijigsaw/inference.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "omnijigsaw/audio.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/image.hpp"
#include "omnijigsaw/prompts.hpp"

namespace omnijigsaw {

using nlohmann::ordered_json;

void InferenceConfig::validate() const {
  if (max_new_tokens <= 0) throw Error(ErrorCode::Config, "max_new_tokens must be positive");
  if (retries < 0) throw Error(ErrorCode::Config, "retries must be non-negative");
  if (max_frames == 0 || max_pixels == 0) throw Error(ErrorCode::Config, "max_frames and max_pixels must be positive");
  if (!(timeout_s > 0.0)) throw Error(ErrorCode::Config, "timeout_s must be positive");
  if (max_in_flight <= 0) throw Error(ErrorCode::Config, "max_in_flight must be positive");
  if (rate_limit_per_s < 0.0 || retry_backoff_s < 0.0) throw Error(ErrorCode::Config, "rates must be non-negative");
}

ContentPart ContentPart::make_text(std::string t) {
  ContentPart p;
  p.kind = Kind::Text;
  p.text = std::move(t);
  return p;
}

ContentPart ContentPart::make_video(std::vector<Frame> frames, double fps) {
  ContentPart p;
  p.kind = Kind::Video;
  p.frames = std::move(frames);
  p.fps = fps;
  return p;
}

ContentPart ContentPart::make_audio(std::vector<float> samples, int sample_rate_hz) {
  ContentPart p;
  p.kind = Kind::Audio;
  p.audio = std::move(samples);
  p.sample_rate_hz = sample_rate_hz;
  return p;
}

namespace {

std::string b64(const std::vector<std::uint8_t>& bytes) {
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

std::string redacted(std::size_t bytes) { return "<redacted " + std::to_string(bytes) + " bytes>"; }

}  // namespace

std::string request_body(const ChatRequest& request, const InferenceConfig& config, bool redact) {
  ordered_json content = ordered_json::array();
  for (const auto& part : request.parts) {
    switch (part.kind) {
      case ContentPart::Kind::Text:
        content.push_back({{"type", "text"}, {"text", part.text}});
        break;
      case ContentPart::Kind::Video: {
        ordered_json frames = ordered_json::array();
        for (const auto& f : part.frames) {
          const auto ppm = image::encode_ppm(f);
          frames.push_back(redact ? redacted(ppm.size()) : "data:image/x-portable-pixmap;base64," + b64(ppm));
        }
        content.push_back({{"type", "video"}, {"video", std::move(frames)}, {"fps", part.fps}});
        break;
      }
      case ContentPart::Kind::Audio: {
        const auto wav = audio::encode_wav(part.audio, part.sample_rate_hz);
        content.push_back(
            {{"type", "input_audio"}, {"input_audio", {{"data", redact ? redacted(wav.size()) : b64(wav)}, {"format", "wav"}}}});
        break;
      }
    }
  }
  ordered_json body;
  body["model"] = config.model;
  body["messages"] = ordered_json::array({{{"role", "user"}, {"content", std::move(content)}}});
  body["temperature"] = config.temperature;
  body["top_p"] = config.top_p;
  body["top_k"] = config.top_k;
  body["repetition_penalty"] = config.repetition_penalty;
  body["max_tokens"] = config.max_new_tokens;
  return body.dump();
}

std::string completion_text(const std::string& response_body) {
  try {
    const auto j = nlohmann::json::parse(response_body);
    const auto& msg = j.at("choices").at(0).at("message").at("content");
    if (msg.is_string()) return msg.get<std::string>();
    // Some servers return content as a list of text parts.
    std::string out;
    for (const auto& p : msg) {
      if (p.value("type", "") == "text") out += p.value("text", "");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::HttpError, std::string("malformed completion body: ") + e.what());
  }
}

std::string request_text(const ChatRequest& request) {
  std::string out;
  for (const auto& p : request.parts) {
    if (p.kind == ContentPart::Kind::Text) out += p.text;
  }
  return out;
}

RateLimiter::RateLimiter(int max_in_flight, double rate_per_s)
    : max_in_flight_(std::max(1, max_in_flight)),
      rate_per_s_(rate_per_s),
      tokens_(std::max(1.0, rate_per_s)),
      last_refill_(std::chrono::steady_clock::now()) {}

RateLimiter::Permit::~Permit() {
  if (owner_) owner_->release();
}

RateLimiter::Permit RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
  if (rate_per_s_ > 0.0) {
    const double burst = std::max(1.0, rate_per_s_);
    while (true) {
      const auto now = std::chrono::steady_clock::now();
      const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
      tokens_ = std::min(burst, tokens_ + elapsed * rate_per_s_);
      last_refill_ = now;
      if (tokens_ >= 1.0) break;
      const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_s_);
      cv_.wait_for(lock, wait);
    }
    tokens_ -= 1.0;
  }
  ++in_flight_;
  return Permit(this);
}

void RateLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

namespace {

// Splits "http://host:port/path" into origin and path; an empty path becomes
// the chat-completions route.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "endpoint URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? std::string() : url.substr(path_start);
  if (path.empty() || path == "/") path = "/v1/chat/completions";
  return {origin, path};
}

}  // namespace

HttpInferenceClient::HttpInferenceClient(InferenceConfig config, std::optional<std::filesystem::path> audit_log)
    : config_(std::move(config)),
      audit_log_(std::move(audit_log)),
      limiter_(config_.max_in_flight, config_.rate_limit_per_s) {
  if (config_.endpoint_url.empty()) throw Error(ErrorCode::Config, "no inference endpoint URL configured");
  std::tie(origin_, path_) = split_url(config_.endpoint_url);
}

std::string HttpInferenceClient::complete(const ChatRequest& request) {
  const std::string body = request_body(request, config_);
  auto permit = limiter_.acquire();

  httplib::Client cli(origin_);
  const auto secs = static_cast<time_t>(config_.timeout_s);
  const auto usecs = static_cast<time_t>((config_.timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = cli.Post(path_, headers, body, "application/json");

  std::string status = "ok";
  std::string response_text;
  int http_status = 0;
  if (!res) {
    status = httplib::to_string(res.error());
  } else {
    http_status = res->status;
    response_text = res->body;
  }
  if (audit_log_) {
    ordered_json entry;
    entry["tag"] = request.tag;
    entry["request"] = nlohmann::json::parse(request_body(request, config_, true));
    entry["status"] = status;
    entry["http_status"] = http_status;
    entry["response"] = response_text;
    std::lock_guard lock(audit_mu_);
    std::ofstream out(*audit_log_, std::ios::app);
    out << entry.dump() << '\n';
  }
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout)
      throw Error(ErrorCode::Timeout, "inference request timed out: " + status);
    throw Error(ErrorCode::EndpointUnreachable, "inference endpoint unreachable: " + status);
  }
  if (res->status != 200)
    throw Error(ErrorCode::HttpError, "inference endpoint returned HTTP " + std::to_string(res->status));
  return completion_text(res->body);
}

std::string complete_with_retries(InferenceClient& client, const ChatRequest& request, int retries, double backoff_s) {
  for (int attempt = 0;; ++attempt) {
    try {
      return client.complete(request);
    } catch (const Error& e) {
      const bool transport = e.code() == ErrorCode::EndpointUnreachable || e.code() == ErrorCode::Timeout ||
                             e.code() == ErrorCode::HttpError;
      if (!transport || attempt >= retries) throw;
      spdlog::warn("{}: attempt {} failed ({}), retrying", request.tag, attempt + 1, e.what());
      if (backoff_s > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff_s * (attempt + 1)));
    }
  }
}

ChatRequest assemble_request(std::string_view rendered, const std::vector<MediaItem>& media, std::string tag) {
  ChatRequest req;
  req.tag = std::move(tag);
  auto push_media = [&](const MediaItem& m) {
    req.parts.push_back(ContentPart::make_video(m.frames, m.fps));
    if (!m.audio.empty()) req.parts.push_back(ContentPart::make_audio(m.audio, 16000));
  };
  const auto segments = prompts::split_media(rendered);
  std::size_t placeholders = 0;
  for (const auto& s : segments) placeholders += s.media == prompts::Segment::Media::Video ? 1 : 0;
  if (placeholders == 0) {
    for (const auto& m : media) push_media(m);
    req.parts.push_back(ContentPart::make_text(std::string(rendered)));
    return req;
  }
  if (placeholders != media.size())
    throw Error(ErrorCode::InvalidArgument, "prompt has " + std::to_string(placeholders) + " video slots but " +
                                                std::to_string(media.size()) + " media items were supplied");
  std::size_t next = 0;
  for (const auto& s : segments) {
    if (!s.text.empty()) req.parts.push_back(ContentPart::make_text(s.text));
    if (s.media == prompts::Segment::Media::Video) push_media(media[next++]);
    // Audio placeholders only appear in audio-only rollout prompts, which are
    // never sent to the endpoint by this library.
  }
  return req;
}

std::string resolve_endpoint_url(const std::string& explicit_url) {
  if (!explicit_url.empty()) return explicit_url;
  const char* env = std::getenv("OMNIJIGSAW_ENDPOINT_URL");
  return env ? std::string(env) : std::string();
}

std::string resolve_api_key() {
  const char* env = std::getenv("OMNIJIGSAW_API_KEY");
  return env ? std::string(env) : std::string();
}

}  // namespace omnijigsaw
