#pragma once

// Deterministic stand-in for the assessor model, served over the same
// chat-completion wire format as a real endpoint. Replies are chosen by which
// prompt the request carries; judge and selector answers are derived from a
// hash of the request so identical payloads always get identical answers.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "omnijigsaw/inference.hpp"

namespace omnijigsaw {

struct MockAssessorConfig {
  bool screen_yes = true;
  /// Fail this many requests with HTTP 503 before answering.
  int fail_first = 0;
  /// Return a malformed answer for judge and selector prompts.
  bool garble = false;
};

/// Reply text for a request whose concatenated text parts are `prompt_text`
/// and whose media payloads hash to `media_digest`.
std::string mock_reply(std::string_view prompt_text, std::uint64_t media_digest, const MockAssessorConfig& config);

/// Reply for a full chat-completion request body; also returns the response body.
std::string mock_completion_body(const std::string& request_body, const MockAssessorConfig& config);

/// In-process client that round-trips requests through the wire format.
class MockInferenceClient final : public InferenceClient {
 public:
  explicit MockInferenceClient(MockAssessorConfig config = {}, InferenceConfig wire = {})
      : config_(config), wire_(std::move(wire)) {}
  std::string complete(const ChatRequest& request) override;
  int calls() const { return calls_; }

 private:
  MockAssessorConfig config_;
  InferenceConfig wire_;
  std::atomic<int> calls_{0};
};

/// HTTP server on 127.0.0.1 answering POST /v1/chat/completions.
class MockAssessorServer {
 public:
  explicit MockAssessorServer(MockAssessorConfig config = {});
  ~MockAssessorServer();
  MockAssessorServer(const MockAssessorServer&) = delete;
  MockAssessorServer& operator=(const MockAssessorServer&) = delete;

  /// Binds (port 0 = any free port) and serves in a background thread.
  int start(int port = 0);
  /// Serves in the calling thread until stop().
  void listen_blocking(const std::string& host, int port);
  void stop();
  std::string url() const;
  int requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace omnijigsaw
