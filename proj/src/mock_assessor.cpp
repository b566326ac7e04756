#include "omnijigsaw/mock_assessor.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "httplib.h"
#include "json.hpp"
#include "omnijigsaw/error.hpp"

namespace omnijigsaw {

namespace {

constexpr std::string_view kScreeningMarker = "expert video analyst tasked with determining";
constexpr std::string_view kJudgeMarker = "Multimodal Content Analyst";
constexpr std::string_view kSelectorMarker = "Multimodal Jigsaw Puzzle Expert";

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int count_clips(std::string_view text) {
  int n = 0;
  while (text.find("Clip " + std::to_string(n + 1) + ":") != std::string_view::npos) ++n;
  return n;
}

}  // namespace

std::string mock_reply(std::string_view prompt_text, std::uint64_t media_digest, const MockAssessorConfig& config) {
  if (prompt_text.find(kScreeningMarker) != std::string_view::npos) {
    if (config.screen_yes)
      return "<think>The footage follows one continuous activity whose steps build on each other, so the order "
             "of events is recoverable from visible state changes.</think>\n<answer>YES</answer>";
    return "<think>The footage shows no meaningful state change and the segments could be arranged in any "
           "order.</think>\n<answer>NO</answer>";
  }
  if (prompt_text.find(kJudgeMarker) != std::string_view::npos) {
    if (config.garble) return "<thinking>Both streams look useful.</thinking><answer>VA</answer>";
    return std::string("<thinking>Comparing the temporal cues carried by each stream.</thinking><answer>") +
           (media_digest % 2 == 0 ? "V" : "A") + "</answer>";
  }
  if (prompt_text.find(kSelectorMarker) != std::string_view::npos) {
    if (config.garble) return "<thinking>Assigning modalities.</thinking><answer>{\"modalities\": [\"V\"</answer>";
    const int n = std::max(1, count_clips(prompt_text));
    static constexpr const char* kTokens[] = {"V", "A", "VA"};
    std::vector<int> picks;
    std::uint64_t h = media_digest;
    for (int i = 0; i < n; ++i) {
      picks.push_back(static_cast<int>(h % 3));
      h = h / 3 + 0x9e3779b97f4a7c15ULL * (i + 1);
    }
    if (n > 1 && std::all_of(picks.begin(), picks.end(), [&](int p) { return p == picks.front(); }))
      picks.front() = (picks.front() + 1) % 3;
    nlohmann::json j;
    j["modalities"] = nlohmann::json::array();
    for (int p : picks) j["modalities"].push_back(kTokens[p]);
    return "<thinking>Balancing visual and audio cues across the clips.</thinking><answer>" + j.dump() + "</answer>";
  }
  const int n = count_clips(prompt_text);
  std::string order;
  for (int i = 1; i <= n; ++i) order += (i > 1 ? ", " : "") + std::to_string(i);
  return "<thinking>Ordering the clips.</thinking><answer>" + order + "</answer>";
}

std::string mock_completion_body(const std::string& request_body, const MockAssessorConfig& config) {
  const auto body = nlohmann::json::parse(request_body);
  std::string text;
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  for (const auto& msg : body.at("messages")) {
    for (const auto& part : msg.at("content")) {
      const std::string type = part.value("type", "");
      if (type == "text") text += part.value("text", "");
      else if (type == "video") {
        for (const auto& url : part.at("video")) digest = fnv1a(url.get<std::string>(), digest);
      } else if (type == "input_audio") {
        digest = fnv1a(part.at("input_audio").value("data", ""), digest);
      }
    }
  }
  nlohmann::ordered_json out;
  out["id"] = "mock-" + std::to_string(digest);
  out["object"] = "chat.completion";
  out["model"] = body.value("model", "mock");
  out["choices"] = nlohmann::ordered_json::array(
      {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", mock_reply(text, digest, config)}}},
        {"finish_reason", "stop"}}});
  return out.dump();
}

std::string MockInferenceClient::complete(const ChatRequest& request) {
  if (calls_++ < config_.fail_first) throw Error(ErrorCode::HttpError, "mock endpoint returned HTTP 503");
  return completion_text(mock_completion_body(request_body(request, wire_), config_));
}

struct MockAssessorServer::Impl {
  MockAssessorConfig config;
  httplib::Server server;
  std::thread thread;
  std::atomic<int> requests{0};
  int port = 0;
};

MockAssessorServer::MockAssessorServer(MockAssessorConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = config;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const int k = impl_->requests++;
    if (k < impl_->config.fail_first) {
      res.status = 503;
      res.set_content(R"({"error":"unavailable"})", "application/json");
      return;
    }
    try {
      res.set_content(mock_completion_body(req.body, impl_->config), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  };
  impl_->server.Post("/v1/chat/completions", handler);
  impl_->server.Post("/chat/completions", handler);
  impl_->server.set_payload_max_length(1ULL << 32);
}

MockAssessorServer::~MockAssessorServer() { stop(); }

int MockAssessorServer::start(int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->server.bind_to_port("127.0.0.1", port)) impl_->port = -1;
    else impl_->port = port;
  }
  if (impl_->port <= 0) throw Error(ErrorCode::EndpointUnreachable, "mock assessor could not bind");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void MockAssessorServer::listen_blocking(const std::string& host, int port) {
  impl_->port = port;
  if (!impl_->server.listen(host, port)) throw Error(ErrorCode::EndpointUnreachable, "mock assessor could not listen");
}

void MockAssessorServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockAssessorServer::url() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

int MockAssessorServer::requests() const { return impl_->requests; }

}  // namespace omnijigsaw
