#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/manifest.hpp"

using namespace omnijigsaw;
namespace fs = std::filesystem;

namespace {

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("omnijigsaw_manifest_" + name) / "manifest.jsonl";
  fs::remove_all(p.parent_path());
  return p;
}

ManifestRecord rec(const std::string& id, Stage s, const std::string& tag = "default") {
  ManifestRecord r;
  r.sample_id = id;
  r.source_path = "in/" + id + ".ojm";
  r.source_tag = tag;
  r.stage = s;
  return r;
}

}  // namespace

TEST_CASE("stage names and ranks") {
  for (auto s : {Stage::Probed, Stage::S1Pass, Stage::S1Reject, Stage::S2Pass, Stage::S2Reject, Stage::Deferred,
                 Stage::BuildFailed, Stage::Built})
    CHECK(parse_stage(to_string(s)) == s);
  CHECK(to_string(Stage::S1Reject) == "S1_REJECT");
  CHECK(stage_rank(Stage::Built) > stage_rank(Stage::S2Pass));
  CHECK(is_terminal(Stage::Built));
  CHECK_FALSE(is_terminal(Stage::Deferred));
}

TEST_CASE("record lines round trip") {
  ManifestRecord r = rec("a", Stage::Built, "web");
  r.seq = 4;
  r.puzzle_path = "puzzles/a/puzzle.json";
  FilterReport fr;
  fr.sample_id = "a";
  fr.stage1.duration_s = 12.0;
  r.report = fr;
  const std::string line = to_json_line(r);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.starts_with(R"({"schema_version":1,"seq":4,"sample_id":"a")"));
  CHECK(line.find(R"("timestamps":{"logical":4})") != std::string::npos);
  CHECK(record_from_json_line(line) == r);
  CHECK_THROWS_AS(record_from_json_line(R"({"schema_version":2})"), Error);
}

TEST_CASE("appends assign sequence numbers and persist") {
  const fs::path p = fresh("append");
  {
    Manifest m(p);
    m.append(rec("a", Stage::S1Pass));
    m.append(rec("b", Stage::S1Reject));
    m.append(rec("a", Stage::S2Pass));
    CHECK(m.latest("a")->stage == Stage::S2Pass);
    CHECK_FALSE(m.latest("zzz").has_value());
  }
  const auto back = read_manifest(p);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].seq == i);
  Manifest reopened(p);
  reopened.append(rec("b", Stage::Built));
  CHECK(reopened.records().back().seq == 3);
}

TEST_CASE("strict read names the corrupt line") {
  const fs::path p = fresh("corrupt");
  {
    Manifest m(p);
    m.append(rec("a", Stage::S1Pass));
    m.append(rec("b", Stage::S1Pass));
  }
  {
    std::ofstream out(p, std::ios::app);
    out << "{not json\n";
  }
  try {
    read_manifest(p);
    FAIL("expected corruption");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptManifest);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK(read_manifest(fresh("missing")).empty());
}

TEST_CASE("opening drops an unterminated final line") {
  const fs::path p = fresh("tail");
  {
    Manifest m(p);
    m.append(rec("a", Stage::S1Pass));
  }
  const auto good = fs::file_size(p);
  {
    std::ofstream out(p, std::ios::app);
    out << R"({"schema_version":1,"seq":1,"sample_)";
  }
  CHECK_THROWS_AS(read_manifest(p), Error);
  Manifest m(p);
  CHECK(m.records().size() == 1);
  CHECK(fs::file_size(p) == good);
  m.append(rec("b", Stage::S1Pass));
  CHECK(read_manifest(p).size() == 2);
}

TEST_CASE("stats use each sample's furthest stage") {
  std::vector<ManifestRecord> rs;
  for (const auto& [id, tag, s] : std::vector<std::tuple<std::string, std::string, Stage>>{
           {"a", "web", Stage::S1Pass}, {"a", "web", Stage::S2Pass}, {"a", "web", Stage::Built},
           {"b", "web", Stage::S1Reject}, {"c", "web", Stage::S1Pass}, {"c", "web", Stage::Deferred},
           {"d", "film", Stage::S1Pass}, {"d", "film", Stage::S2Reject}, {"e", "film", Stage::S1Pass},
           {"e", "film", Stage::S2Pass}, {"e", "film", Stage::BuildFailed}})
    rs.push_back(rec(id, s, tag));
  const auto stats = aggregate_stats(rs);
  REQUIRE(stats.size() == 2);
  CHECK(stats.at("web") == StageCounts{3, 2, 1, 1});
  CHECK(stats.at("film") == StageCounts{2, 2, 1, 0});
  const std::string table = format_stats_table(stats);
  CHECK(table.find("Total") != std::string::npos);
  CHECK(table.find("After Stage 1") != std::string::npos);
}

TEST_CASE("thousands separators") {
  CHECK(with_thousands(0) == "0");
  CHECK(with_thousands(999) == "999");
  CHECK(with_thousands(1000) == "1,000");
  CHECK(with_thousands(49619) == "49,619");
  CHECK(with_thousands(1234567) == "1,234,567");
  const std::string empty = format_stats_table({});
  CHECK(empty.find("Total") != std::string::npos);
}
