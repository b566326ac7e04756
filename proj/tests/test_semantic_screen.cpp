#include "doctest.h"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/fixtures.hpp"
#include "omnijigsaw/mock_assessor.hpp"
#include "omnijigsaw/semantic_screen.hpp"

using namespace omnijigsaw;

namespace {

OmniSample sample(const std::string& id, double d = 12.0) {
  fixtures::FixtureSpec spec;
  spec.name = id;
  spec.duration_s = d;
  return fixtures::make_sample(spec, 5);
}

const std::string kReason = "The cook chops and then fries, an irreversible order.";

}  // namespace

TEST_CASE("verdict parsing") {
  auto v = parse_verdict("<think>" + kReason + "</think><answer>YES</answer>");
  CHECK(v.retained());
  CHECK(v.think_text == kReason);
  v = parse_verdict("<think>" + kReason + "</think>\n<answer> no </answer>");
  CHECK(v.decision == Decision::No);
  CHECK(v.coherent);
  CHECK_FALSE(v.retained());
  CHECK(parse_verdict("<think>" + kReason + "</think><answer>yes</answer>").retained());
}

TEST_CASE("verdicts fail closed") {
  for (const std::string& raw :
       {std::string("<answer>YES</answer>"), std::string("<think>too short</think><answer>YES</answer>"),
        "<think>" + kReason + "</think><answer>YES, clearly</answer>", "<think>" + kReason + "</think>YES",
        "<think>" + kReason + "<answer>YES</answer>", "<answer>YES</answer><think>" + kReason + "</think>",
        std::string("YES"), std::string()}) {
    CAPTURE(raw);
    CHECK_FALSE(parse_verdict(raw).retained());
  }
}

TEST_CASE("screening request carries frames, prompt and optional audio") {
  InferenceConfig cfg;
  cfg.max_frames = 5;
  const ChatRequest r = screening_request(sample("a"), cfg);
  REQUIRE(r.parts.size() == 2);
  CHECK(r.parts[0].kind == ContentPart::Kind::Video);
  CHECK(r.parts[0].frames.size() == 5);
  for (const auto& f : r.parts[0].frames) {
    CHECK(f.width % 28 == 0);
    CHECK(f.pixel_count() <= cfg.max_pixels);
  }
  CHECK(r.parts[1].text.find("<think>") != std::string::npos);
  cfg.include_audio = true;
  const ChatRequest with_audio = screening_request(sample("a"), cfg);
  bool audio = false;
  for (const auto& p : with_audio.parts) audio |= p.kind == ContentPart::Kind::Audio;
  CHECK(audio);
}

TEST_CASE("screen outcomes") {
  const InferenceConfig cfg;
  MockInferenceClient yes;
  auto r = screen_sample(sample("a"), cfg, yes);
  CHECK(r.pass);
  CHECK(r.decision == Decision::Yes);
  CHECK_FALSE(r.reject_reason.has_value());

  MockAssessorConfig no_cfg;
  no_cfg.screen_yes = false;
  MockInferenceClient no(no_cfg);
  r = screen_sample(sample("a"), cfg, no);
  CHECK_FALSE(r.pass);
  CHECK(r.reject_reason == RejectReason::SemanticNo);
  CHECK_FALSE(r.deferred);

  InferenceConfig one_try = cfg;
  one_try.retries = 0;
  one_try.retry_backoff_s = 0.0;
  FunctionInferenceClient down([](const ChatRequest&) -> std::string {
    throw Error(ErrorCode::EndpointUnreachable, "down");
  });
  r = screen_sample(sample("a"), one_try, down);
  CHECK(r.deferred);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.reject_reason.has_value());
}

TEST_CASE("transient failures are retried before deferring") {
  InferenceConfig cfg;
  cfg.retries = 2;
  cfg.retry_backoff_s = 0.0;
  MockAssessorConfig mc;
  mc.fail_first = 2;
  MockInferenceClient flaky(mc, cfg);
  const auto r = screen_sample(sample("a"), cfg, flaky);
  CHECK(r.pass);
  CHECK(flaky.calls() == 3);
}

TEST_CASE("batch screening keeps input order") {
  std::vector<OmniSample> batch;
  for (int i = 0; i < 7; ++i) batch.push_back(sample("s" + std::to_string(i), 8.0 + i));
  FunctionInferenceClient by_length([&](const ChatRequest& req) {
    const bool keep = req.parts.front().frames.size() % 2 == 0;
    return "<think>" + kReason + "</think><answer>" + (keep ? "YES" : "NO") + "</answer>";
  });
  InferenceConfig cfg;
  const auto serial = run_stage2(batch, cfg, by_length, 1);
  const auto parallel = run_stage2(batch, cfg, by_length, 4);
  REQUIRE(serial.size() == batch.size());
  CHECK(serial == parallel);
  for (std::size_t i = 0; i < batch.size(); ++i)
    CHECK(serial[i].pass == (screening_request(batch[i], cfg).parts.front().frames.size() % 2 == 0));
}
