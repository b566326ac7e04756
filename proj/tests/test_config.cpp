#include <optional>

#include "doctest.h"
#include "json.hpp"
#include "omnijigsaw/config.hpp"
#include "omnijigsaw/error.hpp"

using namespace omnijigsaw;

namespace {

std::optional<ErrorCode> code_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("empty config yields defaults") {
  const PipelineConfig c = parse_config("{}");
  CHECK(c.filter.d_max_s == 200.0);
  CHECK(c.filter.mad_threshold == 5.0);
  CHECK(c.filter.vad_min == 0.3);
  CHECK(c.filter.vad_max == 0.8);
  CHECK(c.build.n_clips == 6);
  CHECK(c.build.trim_ratio == 0.05);
  CHECK(c.build.pixel_budget == 100352);
  CHECK(c.build.judge_max_frames == 80);
  CHECK(c.inference.temperature == 0.0);
  CHECK(c.strategy == Strategy::Jmi);
}

TEST_CASE("keys override fields") {
  const PipelineConfig c = parse_config(R"({"n_clips": 4, "strategy": "cmm", "workers": 3, "screen_include_audio": true})");
  CHECK(c.build.n_clips == 4);
  CHECK(c.strategy == Strategy::Cmm);
  CHECK(c.workers == 3);
  CHECK(c.inference.include_audio);
}

TEST_CASE("malformed configs are config errors") {
  CHECK(code_of("{") == ErrorCode::Config);
  CHECK(code_of("[]") == ErrorCode::Config);
  CHECK(code_of(R"({"no_such_key": 1})") == ErrorCode::Config);
  CHECK(code_of(R"({"n_clips": "six"})") == ErrorCode::Config);
  CHECK(code_of(R"({"n_clips": 2.5})") == ErrorCode::Config);
  CHECK(code_of(R"({"strategy": "zig"})") == ErrorCode::Config);
  CHECK(code_of(R"({"standardize": 1})") == ErrorCode::Config);
  CHECK(code_of(R"({"vad_min": 0.9, "vad_max": 0.1})") == ErrorCode::Config);
  CHECK(code_of(R"({"workers": 0})") == ErrorCode::Config);
  CHECK(code_of(R"({"trim_ratio": 0.6})") == ErrorCode::Config);
}

TEST_CASE("dump round trips every key") {
  PipelineConfig c = parse_config(R"({"d_max_s": 90.5, "rng_seed": 77, "model": "m", "strategy": "sms"})");
  const std::string dumped = dump_config(c);
  const auto j = nlohmann::json::parse(dumped);
  CHECK(j.size() == config_keys().size());
  const PipelineConfig back = parse_config(dumped);
  CHECK(dump_config(back) == dumped);
  CHECK(back.filter.d_max_s == 90.5);
  CHECK(back.build.rng_seed == 77);
  CHECK(back.strategy == Strategy::Sms);
}
