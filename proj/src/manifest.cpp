#include "omnijigsaw/manifest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "json.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/serialize.hpp"

namespace omnijigsaw {

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::Probed, "PROBED"},     {Stage::S1Pass, "S1_PASS"},           {Stage::S1Reject, "S1_REJECT"},
    {Stage::S2Pass, "S2_PASS"},    {Stage::S2Reject, "S2_REJECT"},       {Stage::Deferred, "DEFERRED"},
    {Stage::Built, "BUILT"},       {Stage::BuildFailed, "BUILD_FAILED"},
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  return "PROBED";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (const auto& [stage, name] : kStageNames) {
    if (name == s) return stage;
  }
  return std::nullopt;
}

int stage_rank(Stage s) {
  switch (s) {
    case Stage::Probed: return 0;
    case Stage::S1Pass:
    case Stage::S1Reject: return 1;
    case Stage::S2Pass:
    case Stage::S2Reject:
    case Stage::Deferred: return 2;
    case Stage::BuildFailed:
    case Stage::Built: return 3;
  }
  return 0;
}

bool is_terminal(Stage s) {
  return s == Stage::S1Reject || s == Stage::S2Reject || s == Stage::BuildFailed || s == Stage::Built;
}

std::string to_json_line(const ManifestRecord& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["seq"] = r.seq;
  j["sample_id"] = r.sample_id;
  j["source_path"] = r.source_path;
  j["source_tag"] = r.source_tag;
  j["stage"] = std::string(to_string(r.stage));
  j["report"] = r.report ? to_json(*r.report) : ordered_json(nullptr);
  if (r.puzzle_path) j["puzzle_path"] = *r.puzzle_path;
  if (r.error) j["error"] = *r.error;
  ordered_json ts;
  ts["logical"] = r.seq;
  if (r.wall_time) ts["wall"] = *r.wall_time;
  j["timestamps"] = std::move(ts);
  return dump_line(j);
}

ManifestRecord record_from_json_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidJson, e.what());
  }
  try {
    ManifestRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSchemaVersion)
      throw Error(ErrorCode::InvalidJson, "unsupported schema_version " + std::to_string(r.schema_version));
    r.seq = j.at("seq").get<std::uint64_t>();
    r.sample_id = j.at("sample_id").get<std::string>();
    r.source_path = j.at("source_path").get<std::string>();
    r.source_tag = j.at("source_tag").get<std::string>();
    const auto stage = parse_stage(j.at("stage").get<std::string>());
    if (!stage) throw Error(ErrorCode::InvalidJson, "unknown stage");
    r.stage = *stage;
    if (!j.at("report").is_null()) r.report = filter_report_from_json(j.at("report"));
    if (j.contains("puzzle_path")) r.puzzle_path = j.at("puzzle_path").get<std::string>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    const auto& ts = j.at("timestamps");
    if (ts.contains("wall")) r.wall_time = ts.at("wall").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidJson, e.what());
  }
}

namespace {

struct Loaded {
  std::vector<ManifestRecord> records;
  std::uintmax_t good_bytes = 0;
  bool dangling = false;
};

Loaded load(const std::filesystem::path& path, bool tolerate_tail) {
  Loaded out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < data.size()) {
    ++line_no;
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) {
      if (tolerate_tail) {
        out.dangling = true;
        break;
      }
      try {
        out.records.push_back(record_from_json_line(std::string_view(data).substr(pos)));
      } catch (const Error& e) {
        throw Error(ErrorCode::CorruptManifest,
                    path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
      pos = data.size();
      break;
    }
    const std::string_view line = std::string_view(data).substr(pos, nl - pos);
    if (!line.empty()) {
      try {
        out.records.push_back(record_from_json_line(line));
      } catch (const Error& e) {
        throw Error(ErrorCode::CorruptManifest,
                    path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = nl + 1;
  }
  out.good_bytes = pos;
  return out;
}

}  // namespace

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) { return load(path, false).records; }

Manifest::Manifest(std::filesystem::path path, bool wall_clock) : path_(std::move(path)), wall_clock_(wall_clock) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  Loaded l = load(path_, true);
  if (l.dangling) {
    spdlog::warn("{}: dropping unterminated final line", path_.string());
    std::filesystem::resize_file(path_, l.good_bytes);
  }
  records_ = std::move(l.records);
  for (std::size_t i = 0; i < records_.size(); ++i) latest_[records_[i].sample_id] = i;
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw Error(ErrorCode::Unreadable, "cannot open manifest " + path_.string() + " for appending");
}

void Manifest::append(ManifestRecord record) {
  std::lock_guard lock(mu_);
  record.seq = records_.size();
  if (wall_clock_) record.wall_time = utc_now();
  out_ << to_json_line(record) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::Unreadable, "write to manifest " + path_.string() + " failed");
  latest_[record.sample_id] = records_.size();
  records_.push_back(std::move(record));
}

std::optional<ManifestRecord> Manifest::latest(const std::string& sample_id) const {
  const auto it = latest_.find(sample_id);
  if (it == latest_.end()) return std::nullopt;
  return records_[it->second];
}

std::map<std::string, StageCounts> aggregate_stats(std::span<const ManifestRecord> records) {
  std::map<std::string, const ManifestRecord*> furthest;
  for (const auto& r : records) {
    auto& slot = furthest[r.sample_id];
    if (!slot || stage_rank(r.stage) >= stage_rank(slot->stage)) slot = &r;
  }
  std::map<std::string, StageCounts> out;
  for (const auto& [id, r] : furthest) {
    StageCounts& c = out[r->source_tag];
    ++c.raw;
    const Stage s = r->stage;
    if (stage_rank(s) >= 2 || s == Stage::S1Pass) ++c.after_stage1;
    if (s == Stage::S2Pass || s == Stage::Built || s == Stage::BuildFailed) ++c.after_stage2;
    if (s == Stage::Built) ++c.built;
  }
  return out;
}

std::string with_thousands(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  const std::size_t lead = digits.size() % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i && (i + 3 - lead) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string format_stats_table(const std::map<std::string, StageCounts>& stats) {
  StageCounts total;
  for (const auto& [tag, c] : stats) {
    total.raw += c.raw;
    total.after_stage1 += c.after_stage1;
    total.after_stage2 += c.after_stage2;
    total.built += c.built;
  }
  std::size_t width = 6;
  for (const auto& [tag, c] : stats) width = std::max(width, tag.size());
  auto row = [&](const std::string& name, const std::string& a, const std::string& b, const std::string& c,
                 const std::string& d) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %12s  %14s  %14s  %10s\n", static_cast<int>(width), name.c_str(), a.c_str(),
                  b.c_str(), c.c_str(), d.c_str());
    return std::string(buf);
  };
  auto counts = [&](const std::string& name, const StageCounts& c) {
    return row(name, with_thousands(c.raw), with_thousands(c.after_stage1), with_thousands(c.after_stage2),
               with_thousands(c.built));
  };
  std::string out = row("Source", "Raw", "After Stage 1", "After Stage 2", "Built");
  for (const auto& [tag, c] : stats) out += counts(tag, c);
  out += counts("Total", total);
  return out;
}

}  // namespace omnijigsaw
