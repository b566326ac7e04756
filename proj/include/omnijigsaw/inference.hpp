#pragma once

// Client side of the external MLLM endpoint. The wire format is an
// OpenAI-compatible chat completion: one user message whose content is a list
// of parts, with media interleaved where prompts carry <video>/<audio>
// placeholders:
//
//   {"type": "text", "text": "..."}
//   {"type": "video", "video": ["data:image/x-portable-pixmap;base64,...", ...], "fps": 2.0}
//   {"type": "input_audio", "input_audio": {"data": "<base64 wav>", "format": "wav"}}
//
// plus sampling fields temperature, top_p, top_k, repetition_penalty and
// max_tokens. The completion text is read from choices[0].message.content.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

struct InferenceConfig {
  std::size_t max_frames = 200;
  std::size_t max_pixels = 100352;
  double temperature = 0.0;
  double top_p = 1.0;
  int top_k = -1;  // disabled
  double repetition_penalty = 1.05;
  int max_new_tokens = 2048;
  std::string endpoint_url;
  std::string api_key;
  std::string model = "Qwen2.5-VL-7B-Instruct";
  double timeout_s = 120.0;
  int retries = 2;
  double retry_backoff_s = 0.5;
  int max_in_flight = 4;
  double rate_limit_per_s = 0.0;  // 0 = unlimited
  bool include_audio = false;     // attach audio to screening requests

  /// Throws Error(Config).
  void validate() const;
};

struct ContentPart {
  enum class Kind { Text, Video, Audio } kind = Kind::Text;
  std::string text;
  std::vector<Frame> frames;
  double fps = 0.0;
  std::vector<float> audio;
  int sample_rate_hz = 16000;

  static ContentPart make_text(std::string t);
  static ContentPart make_video(std::vector<Frame> frames, double fps);
  static ContentPart make_audio(std::vector<float> samples, int sample_rate_hz);
};

struct ChatRequest {
  std::vector<ContentPart> parts;
  std::string tag;  // audit label, e.g. "screen:<sample_id>"
};

/// Builds the JSON request body. With `redact`, media payloads are replaced by
/// their byte counts.
std::string request_body(const ChatRequest& request, const InferenceConfig& config, bool redact = false);

/// Pulls choices[0].message.content out of a completion body; Error(HttpError) if absent.
std::string completion_text(const std::string& response_body);

/// Concatenation of every text part, in order.
std::string request_text(const ChatRequest& request);

class InferenceClient {
 public:
  virtual ~InferenceClient() = default;
  /// One attempt. Throws Error(EndpointUnreachable|Timeout|HttpError).
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// Token bucket plus an in-flight cap. Shared by every caller of one endpoint.
class RateLimiter {
 public:
  RateLimiter(int max_in_flight, double rate_per_s);

  class Permit {
   public:
    explicit Permit(RateLimiter* owner) : owner_(owner) {}
    Permit(Permit&& o) noexcept : owner_(std::exchange(o.owner_, nullptr)) {}
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    Permit& operator=(Permit&&) = delete;
    ~Permit();

   private:
    RateLimiter* owner_;
  };

  Permit acquire();

 private:
  void release();

  std::mutex mu_;
  std::condition_variable cv_;
  int max_in_flight_;
  int in_flight_ = 0;
  double rate_per_s_;
  double tokens_;
  std::chrono::steady_clock::time_point last_refill_;
};

/// HTTP(S) client for the chat-completion endpoint. Request/response bodies are
/// appended, redacted, to `audit_log` when set.
class HttpInferenceClient final : public InferenceClient {
 public:
  HttpInferenceClient(InferenceConfig config, std::optional<std::filesystem::path> audit_log = std::nullopt);
  std::string complete(const ChatRequest& request) override;

 private:
  InferenceConfig config_;
  std::string origin_;
  std::string path_;
  std::optional<std::filesystem::path> audit_log_;
  std::mutex audit_mu_;
  RateLimiter limiter_;
};

/// In-process client backed by a function, for tests and offline runs.
class FunctionInferenceClient final : public InferenceClient {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;
  explicit FunctionInferenceClient(Handler handler) : handler_(std::move(handler)) {}
  std::string complete(const ChatRequest& request) override { return handler_(request); }

 private:
  Handler handler_;
};

/// Calls `client.complete` up to 1 + retries times on transport errors.
std::string complete_with_retries(InferenceClient& client, const ChatRequest& request, int retries,
                                  double backoff_s = 0.0);

/// Media bound to one `<video>` placeholder: frames plus optional soundtrack.
struct MediaItem {
  std::vector<Frame> frames;
  double fps = 1.0;
  std::vector<float> audio;  // 16 kHz; empty = no audio part
};

/// Splits `rendered` at its `<video>` placeholders and binds `media` to them in
/// order. Without placeholders, all media precedes the text. Throws
/// Error(InvalidArgument) when the counts disagree.
ChatRequest assemble_request(std::string_view rendered, const std::vector<MediaItem>& media, std::string tag);

/// Endpoint URL from the explicit value or OMNIJIGSAW_ENDPOINT_URL.
std::string resolve_endpoint_url(const std::string& explicit_url);
/// API key from OMNIJIGSAW_API_KEY (empty when unset).
std::string resolve_api_key();

}  // namespace omnijigsaw
