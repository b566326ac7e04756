#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/fixtures.hpp"
#include "omnijigsaw/mock_assessor.hpp"
#include "omnijigsaw/package.hpp"
#include "omnijigsaw/pipeline.hpp"
#include "omnijigsaw/puzzle_builder.hpp"
#include "omnijigsaw/reward.hpp"

using namespace omnijigsaw;
namespace fs = std::filesystem;

namespace {

struct Corpus {
  fs::path in;
  std::vector<fixtures::FixtureLabel> labels;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus out;
    out.in = fs::temp_directory_path() / "omnijigsaw_pipeline_in";
    fs::remove_all(out.in);
    out.labels = fixtures::gen_fixtures(out.in, 7);
    return out;
  }();
  return c;
}

fs::path fresh_out(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("omnijigsaw_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

PipelineOptions options(const fs::path& out, InferenceClient& client, Strategy st = Strategy::Jmi) {
  PipelineOptions o;
  o.input_dir = corpus().in;
  o.output_dir = out;
  o.config.strategy = st;
  o.config.inference.retry_backoff_s = 0.0;
  o.client = &client;
  return o;
}

std::set<std::string> designed_pass() {
  std::set<std::string> ids;
  for (const auto& l : corpus().labels)
    if (l.expected_stage1 == "PASS") ids.insert(l.sample_id);
  return ids;
}

std::map<std::string, ManifestRecord> latest(const fs::path& out) {
  std::map<std::string, ManifestRecord> m;
  for (auto& r : read_manifest(out / "manifest.jsonl")) m[r.sample_id] = r;
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("the corpus reaches the designed stages") {
  REQUIRE(corpus().labels.size() == 20);
  MockInferenceClient mock;
  const fs::path out = fresh_out("basic");
  const PipelineResult res = run_pipeline(options(out, mock));
  CHECK(res.samples == 20);
  CHECK(res.exit_code == kExitOk);
  CHECK(res.final_stages.at(Stage::Built) == 10);
  CHECK(res.final_stages.at(Stage::S1Reject) == 10);

  const auto last = latest(out);
  std::set<std::string> built;
  for (const auto& label : corpus().labels) {
    CAPTURE(label.sample_id);
    const ManifestRecord& r = last.at(label.sample_id);
    if (r.stage == Stage::Built) built.insert(r.sample_id);
    if (label.expected_stage1 != "PASS") {
      REQUIRE(r.report.has_value());
      REQUIRE(r.report->stage1.reject_reason.has_value());
      CHECK(std::string(to_string(*r.report->stage1.reject_reason)) == label.expected_stage1);
    }
    CHECK(r.source_tag == "synthetic");
  }
  CHECK(built == designed_pass());
  const auto stats = aggregate_stats(read_manifest(out / "manifest.jsonl"));
  CHECK(stats.at("synthetic") == StageCounts{20, 10, 10, 10});
}

TEST_CASE("built packages validate and reassemble") {
  for (auto st : {Strategy::Jmi, Strategy::Sms, Strategy::Cmm}) {
    CAPTURE(to_string(st));
    MockInferenceClient mock;
    const fs::path out = fresh_out("packages");
    PipelineOptions o = options(out, mock, st);
    run_pipeline(o);
    const MediaRegistry registry;
    for (const auto& [id, r] : latest(out)) {
      if (r.stage != Stage::Built) continue;
      CAPTURE(id);
      const fs::path dir = out / fs::path(*r.puzzle_path).parent_path();
      const PuzzleDocument doc = validate_puzzle_package(dir);
      CHECK(doc.strategy == st);

      OmniSample src = registry.decode(corpus().in / r.source_path, {});
      src.id = id;
      MockInferenceClient again;
      const PuzzleInstance mem = build_puzzle(src, st, o.config.build, &again, o.config.inference);
      CHECK(mem.ground_truth() == doc.ground_truth);
      const auto chrono = reassemble(std::span<const Clip>(mem.shuffled_clips), std::span<const int>(doc.ground_truth));
      REQUIRE(chrono.size() == 6);
      for (int i = 0; i < 6; ++i) CHECK(chrono[static_cast<std::size_t>(i)].orig_index == i + 1);
      for (int j = 0; j < 6; ++j) {
        const Clip& c = mem.shuffled_clips[static_cast<std::size_t>(j)];
        if (!c.video_present) continue;
        const OmniSample on_disk = registry.decode(dir / clip_file_name(j + 1), {});
        REQUIRE(on_disk.video.size() == c.frames.size());
        CHECK(on_disk.video.front().rgb == c.frames.front().rgb);
      }
    }
  }
}

TEST_CASE("all-NO screening rejects at stage 2") {
  MockAssessorConfig mc;
  mc.screen_yes = false;
  MockInferenceClient mock(mc);
  const fs::path out = fresh_out("no");
  const auto res = run_pipeline(options(out, mock));
  CHECK(res.final_stages.at(Stage::S2Reject) == 10);
  CHECK_FALSE(res.final_stages.count(Stage::Built));
  CHECK_FALSE(fs::exists(out / "puzzles"));
}

TEST_CASE("an unreachable assessor defers and resume completes the work") {
  const fs::path out = fresh_out("defer");
  FunctionInferenceClient down([](const ChatRequest&) -> std::string {
    throw Error(ErrorCode::EndpointUnreachable, "down");
  });
  PipelineOptions o = options(out, down);
  o.config.inference.retries = 0;
  const auto first = run_pipeline(o);
  CHECK(first.exit_code == kExitPartial);
  CHECK(first.final_stages.at(Stage::Deferred) == 10);

  MockInferenceClient mock;
  o.client = &mock;
  CHECK_THROWS_AS(run_pipeline(o), Error);
  o.resume = true;
  const auto second = run_pipeline(o);
  CHECK(second.exit_code == kExitOk);
  CHECK(second.processed == 10);
  CHECK(second.final_stages.at(Stage::Built) == 10);
}

TEST_CASE("resume is idempotent and survives a torn write") {
  MockInferenceClient mock;
  const fs::path out = fresh_out("resume");
  PipelineOptions o = options(out, mock);
  run_pipeline(o);
  const std::string before = slurp(out / "manifest.jsonl");

  o.resume = true;
  const auto again = run_pipeline(o);
  CHECK(again.processed == 0);
  CHECK(slurp(out / "manifest.jsonl") == before);

  // drop the last record and half of the one before it
  std::string torn = before.substr(0, before.rfind('\n', before.size() - 2) + 1);
  const auto cut = torn.rfind('\n', torn.size() - 2);
  torn = torn.substr(0, cut + 1 + (torn.size() - cut) / 2);
  {
    std::ofstream w(out / "manifest.jsonl", std::ios::binary | std::ios::trunc);
    w << torn;
  }
  const auto healed = run_pipeline(o);
  CHECK(healed.processed >= 1);
  CHECK(healed.final_stages.at(Stage::Built) == 10);
  CHECK(healed.final_stages.at(Stage::S1Reject) == 10);
  CHECK_NOTHROW(read_manifest(out / "manifest.jsonl"));
}

TEST_CASE("parallel workers write the same manifest as one worker") {
  MockInferenceClient a, b;
  const fs::path one = fresh_out("w1"), four = fresh_out("w4");
  PipelineOptions o1 = options(one, a), o4 = options(four, b);
  o4.config.workers = 4;
  run_pipeline(o1);
  run_pipeline(o4);
  CHECK(slurp(one / "manifest.jsonl") == slurp(four / "manifest.jsonl"));
}

TEST_CASE("stage-1 runs need no endpoint") {
  const fs::path out = fresh_out("s1");
  PipelineOptions o;
  o.input_dir = corpus().in;
  o.output_dir = out;
  o.until = RunUntil::Stage1;
  const auto res = run_pipeline(o);
  CHECK(res.final_stages.at(Stage::S1Pass) == 10);

  PipelineOptions needs;
  needs.input_dir = corpus().in;
  needs.output_dir = fresh_out("s2");
  needs.until = RunUntil::Stage2;
  needs.config.inference.endpoint_url.clear();
  ::unsetenv("OMNIJIGSAW_ENDPOINT_URL");
  try {
    run_pipeline(needs);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
  CHECK_FALSE(fs::exists(needs.output_dir / "manifest.jsonl"));
}

TEST_CASE("input listing") {
  const fs::path dir = fresh_out("dups");
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  std::ofstream(dir / "a" / "x.ojm") << "x";
  std::ofstream(dir / "top.ojm") << "x";
  std::ofstream(dir / "notes.txt") << "x";
  auto files = list_inputs(dir);
  REQUIRE(files.size() == 2);
  CHECK(files[0].relative == "a/x.ojm");
  CHECK(files[0].source_tag == "a");
  CHECK(files[1].source_tag == "default");
  std::ofstream(dir / "b" / "x.ojm") << "x";
  CHECK_THROWS_AS(list_inputs(dir), Error);
}

TEST_CASE("score requests") {
  MockInferenceClient mock;
  const fs::path out = fresh_out("score");
  run_pipeline(options(out, mock));
  std::string puzzle;
  std::vector<int> truth;
  for (const auto& [id, r] : latest(out))
    if (r.stage == Stage::Built) {
      puzzle = (out / *r.puzzle_path).string();
      truth = validate_puzzle_package(fs::path(puzzle).parent_path()).ground_truth;
      break;
    }
  REQUIRE_FALSE(puzzle.empty());

  nlohmann::json a{{"response", synthetic_response(truth)}, {"puzzle_path", puzzle}};
  nlohmann::json b{{"response", "<think>x</think><answer>1, 2</answer>"}, {"ground_truth", {2, 1}}, {"tag_style", "think"}};
  std::istringstream in(a.dump() + "\n" + b.dump() + "\n\n{\"response\": 1}\n" +
                        nlohmann::json{{"response", "x"}, {"puzzle_path", "/nope/puzzle.json"}}.dump() + "\n");
  std::ostringstream os;
  CHECK(score_jsonl(in, os) == 2);
  std::istringstream lines(os.str());
  std::vector<nlohmann::json> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(nlohmann::json::parse(l));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0]["r_total"] == 1.2);
  CHECK(rows[1]["r_total"].get<double>() == doctest::Approx(0.2));
  CHECK(rows[2].contains("error"));
  CHECK(rows[2]["r_total"] == 0.0);
  CHECK(rows[3].contains("error"));
}
