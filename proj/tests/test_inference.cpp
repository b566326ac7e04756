#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/inference.hpp"
#include "omnijigsaw/mock_assessor.hpp"
#include "omnijigsaw/prompts.hpp"

using namespace omnijigsaw;
namespace fs = std::filesystem;

namespace {

ChatRequest sample_request() {
  ChatRequest r;
  r.tag = "t";
  r.parts.push_back(ContentPart::make_video({Frame{2, 1, 0.0, {1, 2, 3, 4, 5, 6}}}, 2.0));
  r.parts.push_back(ContentPart::make_audio(std::vector<float>(160, 0.1f), 16000));
  r.parts.push_back(ContentPart::make_text("Order the clips."));
  return r;
}

}  // namespace

TEST_CASE("request body wire format") {
  InferenceConfig cfg;
  const auto j = nlohmann::json::parse(request_body(sample_request(), cfg));
  CHECK(j["model"] == cfg.model);
  CHECK(j["temperature"] == 0.0);
  CHECK(j["repetition_penalty"] == 1.05);
  CHECK(j["max_tokens"] == 2048);
  const auto& content = j["messages"][0]["content"];
  REQUIRE(content.size() == 3);
  CHECK(content[0]["type"] == "video");
  CHECK(content[0]["fps"] == 2.0);
  CHECK(content[0]["video"][0].get<std::string>().starts_with("data:image/x-portable-pixmap;base64,"));
  CHECK(content[1]["type"] == "input_audio");
  CHECK(content[1]["input_audio"]["format"] == "wav");
  CHECK(content[2]["text"] == "Order the clips.");
  const auto red = nlohmann::json::parse(request_body(sample_request(), cfg, true));
  CHECK(red["messages"][0]["content"][0]["video"][0].get<std::string>().find("base64") == std::string::npos);
  CHECK(request_text(sample_request()) == "Order the clips.");
}

TEST_CASE("completion text extraction") {
  CHECK(completion_text(R"({"choices":[{"message":{"content":"hi"}}]})") == "hi");
  CHECK(completion_text(R"({"choices":[{"message":{"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}]}}]})") == "ab");
  CHECK_THROWS_AS(completion_text(R"({"choices":[]})"), Error);
  CHECK_THROWS_AS(completion_text("not json"), Error);
}

TEST_CASE("assemble binds media to placeholders") {
  const std::string rendered = prompts::render(prompts::kCmmSelector, 3);
  std::vector<MediaItem> media(3);
  for (auto& m : media) {
    m.frames = {Frame{1, 1, 0.0, {0, 0, 0}}};
    m.audio = std::vector<float>(16, 0.0f);
  }
  const ChatRequest r = assemble_request(rendered, media, "x");
  int videos = 0, audios = 0;
  for (const auto& p : r.parts) {
    videos += p.kind == ContentPart::Kind::Video;
    audios += p.kind == ContentPart::Kind::Audio;
  }
  CHECK(videos == 3);
  CHECK(audios == 3);
  CHECK(request_text(r).find("<video>") == std::string::npos);
  CHECK_THROWS_AS(assemble_request(rendered, std::vector<MediaItem>(2), "x"), Error);

  const ChatRequest front = assemble_request("no placeholders here", {MediaItem{}}, "y");
  REQUIRE(front.parts.size() == 2);
  CHECK(front.parts[0].kind == ContentPart::Kind::Video);
  CHECK(front.parts[1].kind == ContentPart::Kind::Text);
}

TEST_CASE("prompt assets render for any clip count") {
  for (auto id : prompts::ids()) CHECK_FALSE(prompts::asset(id).empty());
  const std::string six = prompts::render(prompts::kJmiRollout, 6);
  CHECK(six.find("{{") == std::string::npos);
  CHECK(prompts::render(prompts::kCmmSelector, 6).find("Clip 6: <video>") != std::string::npos);
  CHECK(prompts::render(prompts::kCmmSelector, 4).find("Clip 5:") == std::string::npos);
  CHECK_THROWS_AS(prompts::asset("nope"), Error);
  CHECK(prompts::rollout_prompt_id(Strategy::Sms, Modality::V) == prompts::kVideoRollout);
}

TEST_CASE("http client against the in-process mock server") {
  MockAssessorServer server;
  server.start();
  InferenceConfig cfg;
  cfg.endpoint_url = server.url() + "/v1/chat/completions";
  const fs::path audit = fs::temp_directory_path() / "omnijigsaw_audit_test.jsonl";
  fs::remove(audit);
  HttpInferenceClient client(cfg, audit);
  ChatRequest r = sample_request();
  r.parts.back().text = prompts::render(prompts::kSemanticScreening, 6);
  const std::string reply = client.complete(r);
  CHECK(reply.find("<answer>YES</answer>") != std::string::npos);
  CHECK(server.requests() == 1);

  std::ifstream in(audit);
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto entry = nlohmann::json::parse(line);
  CHECK(entry["tag"] == "t");
  CHECK(entry["http_status"] == 200);
  CHECK(line.find("base64") == std::string::npos);
}

TEST_CASE("http errors are typed and retried") {
  MockAssessorConfig mc;
  mc.fail_first = 2;
  MockAssessorServer server(mc);
  server.start();
  InferenceConfig cfg;
  cfg.endpoint_url = server.url();
  cfg.retries = 0;
  HttpInferenceClient client(cfg);
  try {
    client.complete(sample_request());
    FAIL("expected HTTP error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HttpError);
  }
  CHECK_NOTHROW(complete_with_retries(client, sample_request(), 1, 0.0));
  CHECK(server.requests() == 3);
}

TEST_CASE("unreachable endpoint") {
  InferenceConfig cfg;
  cfg.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
  cfg.timeout_s = 2.0;
  HttpInferenceClient client(cfg);
  try {
    client.complete(sample_request());
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::EndpointUnreachable || e.code() == ErrorCode::Timeout));
  }
}

TEST_CASE("retry helper gives up after the retry budget") {
  int calls = 0;
  FunctionInferenceClient flaky([&](const ChatRequest&) -> std::string {
    if (++calls < 3) throw Error(ErrorCode::Timeout, "slow");
    return "ok";
  });
  CHECK(complete_with_retries(flaky, ChatRequest{}, 2) == "ok");
  CHECK(calls == 3);
  calls = 0;
  CHECK_THROWS_AS(complete_with_retries(flaky, ChatRequest{}, 1), Error);
  CHECK(calls == 2);
}

TEST_CASE("mock in-process client fails first calls") {
  MockAssessorConfig mc;
  mc.fail_first = 1;
  MockInferenceClient mock(mc);
  CHECK_THROWS_AS(mock.complete(sample_request()), Error);
  CHECK(mock.complete(sample_request()).find("<answer>") != std::string::npos);
  CHECK(mock.calls() == 2);
}

TEST_CASE("rate limiter caps concurrency") {
  RateLimiter limiter(2, 0.0);
  std::atomic<int> active{0}, peak{0};
  std::vector<std::thread> ts;
  for (int i = 0; i < 6; ++i)
    ts.emplace_back([&] {
      auto permit = limiter.acquire();
      const int now = ++active;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --active;
    });
  for (auto& t : ts) t.join();
  CHECK(peak.load() <= 2);
}

TEST_CASE("rate limiter spaces requests") {
  RateLimiter limiter(8, 20.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 30; ++i) auto p = limiter.acquire();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs >= 0.4);
}

TEST_CASE("endpoint resolution") {
  ::setenv("OMNIJIGSAW_ENDPOINT_URL", "http://env:1", 1);
  CHECK(resolve_endpoint_url("") == "http://env:1");
  CHECK(resolve_endpoint_url("http://flag:2") == "http://flag:2");
  ::unsetenv("OMNIJIGSAW_ENDPOINT_URL");
  CHECK(resolve_endpoint_url("").empty());
  InferenceConfig c;
  c.max_in_flight = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
