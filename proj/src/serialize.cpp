#include "omnijigsaw/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "omnijigsaw/error.hpp"

namespace omnijigsaw {

namespace {

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json opt_reason(const std::optional<RejectReason>& r) {
  return r ? ordered_json(std::string(to_string(*r))) : ordered_json(nullptr);
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidJson, what); }

template <typename T>
T get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(std::string("missing or mistyped field '") + key + "'");
  }
}

std::optional<double> get_opt_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<double>(j, key);
}

std::optional<RejectReason> get_reason(const nlohmann::json& j) {
  if (!j.contains("reject_reason") || j.at("reject_reason").is_null()) return std::nullopt;
  const auto r = parse_reject_reason(get<std::string>(j, "reject_reason"));
  if (!r) bad("unknown reject_reason");
  return r;
}

}  // namespace

ordered_json to_json(const RewardBreakdown& b) {
  ordered_json j;
  j["r_total"] = b.r_total;
  j["r_pos"] = b.r_pos;
  j["r_cont"] = b.r_cont;
  j["lambda"] = b.lambda;
  j["r_fmt"] = b.r_fmt;
  j["r_rep"] = b.r_rep;
  j["format_ok"] = b.format_ok;
  j["parsed_ok"] = b.parsed_ok;
  j["perfect"] = b.perfect;
  return j;
}

RewardBreakdown reward_breakdown_from_json(const nlohmann::json& j) {
  RewardBreakdown b;
  b.r_total = get<double>(j, "r_total");
  b.r_pos = get<double>(j, "r_pos");
  b.r_cont = get<double>(j, "r_cont");
  b.lambda = get<double>(j, "lambda");
  b.r_fmt = get<double>(j, "r_fmt");
  b.r_rep = get<double>(j, "r_rep");
  b.format_ok = get<bool>(j, "format_ok");
  b.parsed_ok = get<bool>(j, "parsed_ok");
  b.perfect = get<bool>(j, "perfect");
  return b;
}

ordered_json to_json(const Stage1Report& r) {
  ordered_json j;
  j["duration_s"] = r.duration_s;
  j["duration_ok"] = r.duration_ok;
  j["streams_ok"] = r.streams_ok;
  j["static_ratio"] = opt(r.static_ratio);
  j["silence_ratio"] = opt(r.silence_ratio);
  j["flux_variance"] = opt(r.flux_variance);
  j["speech_ratio"] = opt(r.speech_ratio);
  j["pass"] = r.pass;
  j["reject_reason"] = opt_reason(r.reject_reason);
  return j;
}

ordered_json to_json(const Stage2Report& r) {
  ordered_json j;
  j["think_text"] = r.think_text;
  j["decision"] = r.decision == Decision::Yes ? "YES" : "NO";
  j["coherent"] = r.coherent;
  j["pass"] = r.pass;
  j["deferred"] = r.deferred;
  j["reject_reason"] = opt_reason(r.reject_reason);
  return j;
}

ordered_json to_json(const FilterReport& r) {
  ordered_json j;
  j["sample_id"] = r.sample_id;
  j["stage1"] = to_json(r.stage1);
  j["stage2"] = r.stage2 ? to_json(*r.stage2) : ordered_json(nullptr);
  return j;
}

FilterReport filter_report_from_json(const nlohmann::json& j) {
  FilterReport r;
  r.sample_id = get<std::string>(j, "sample_id");
  const auto& s1 = j.at("stage1");
  r.stage1.duration_s = get<double>(s1, "duration_s");
  r.stage1.duration_ok = get<bool>(s1, "duration_ok");
  r.stage1.streams_ok = get<bool>(s1, "streams_ok");
  r.stage1.static_ratio = get_opt_double(s1, "static_ratio");
  r.stage1.silence_ratio = get_opt_double(s1, "silence_ratio");
  r.stage1.flux_variance = get_opt_double(s1, "flux_variance");
  r.stage1.speech_ratio = get_opt_double(s1, "speech_ratio");
  r.stage1.pass = get<bool>(s1, "pass");
  r.stage1.reject_reason = get_reason(s1);
  if (j.contains("stage2") && !j.at("stage2").is_null()) {
    const auto& s2 = j.at("stage2");
    Stage2Report t;
    t.think_text = get<std::string>(s2, "think_text");
    t.decision = get<std::string>(s2, "decision") == "YES" ? Decision::Yes : Decision::No;
    t.coherent = get<bool>(s2, "coherent");
    t.pass = get<bool>(s2, "pass");
    t.deferred = get<bool>(s2, "deferred");
    t.reject_reason = get_reason(s2);
    r.stage2 = t;
  }
  return r;
}

std::string clip_file_name(int position) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip_%02d%s", position, ".ojm");
  return buf;
}

PuzzleDocument make_document(const PuzzleInstance& puzzle) {
  PuzzleDocument d;
  d.sample_id = puzzle.sample_id;
  d.n_clips = puzzle.n_clips;
  d.strategy = puzzle.strategy;
  d.permutation = puzzle.permutation.forward_array();
  d.ground_truth = puzzle.ground_truth();
  d.dominance = puzzle.dominance;
  d.modality_vector = puzzle.modality_vector;
  d.prompt_id = puzzle.prompt_id;
  d.rng_seed = puzzle.rng_seed;
  for (std::size_t j = 0; j < puzzle.shuffled_clips.size(); ++j) {
    const Clip& c = puzzle.shuffled_clips[j];
    ClipMeta m;
    m.position = static_cast<int>(j) + 1;
    m.file = clip_file_name(m.position);
    m.duration_s = c.duration_s;
    m.n_frames = static_cast<int>(c.frames.size());
    if (!c.frames.empty()) {
      m.width = c.frames.front().width;
      m.height = c.frames.front().height;
    }
    m.video_present = c.video_present;
    m.audio_present = c.audio_present;
    d.clip_meta.push_back(std::move(m));
  }
  return d;
}

ordered_json to_json(const PuzzleDocument& d) {
  ordered_json j;
  j["schema_version"] = d.schema_version;
  j["sample_id"] = d.sample_id;
  j["n_clips"] = d.n_clips;
  j["strategy"] = std::string(to_string(d.strategy));
  j["permutation"] = d.permutation;
  j["ground_truth"] = d.ground_truth;
  if (d.dominance) j["dominance"] = std::string(to_string(*d.dominance));
  if (d.modality_vector) {
    ordered_json v = ordered_json::array();
    for (auto m : *d.modality_vector) v.push_back(std::string(to_string(m)));
    j["modality_vector"] = std::move(v);
  }
  j["prompt_id"] = d.prompt_id;
  j["rng_seed"] = d.rng_seed;
  ordered_json clips = ordered_json::array();
  for (const auto& m : d.clip_meta) {
    ordered_json c;
    c["position"] = m.position;
    c["file"] = m.file;
    c["duration_s"] = m.duration_s;
    c["n_frames"] = m.n_frames;
    c["width"] = m.width;
    c["height"] = m.height;
    c["video_present"] = m.video_present;
    c["audio_present"] = m.audio_present;
    clips.push_back(std::move(c));
  }
  j["clip_meta"] = std::move(clips);
  return j;
}

PuzzleDocument puzzle_document_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("puzzle document must be an object");
  PuzzleDocument d;
  d.schema_version = get<int>(j, "schema_version");
  if (d.schema_version != kSchemaVersion) bad("unsupported schema_version " + std::to_string(d.schema_version));
  d.sample_id = get<std::string>(j, "sample_id");
  d.n_clips = get<int>(j, "n_clips");
  const auto strategy = parse_strategy(get<std::string>(j, "strategy"));
  if (!strategy) bad("unknown strategy");
  d.strategy = *strategy;
  d.permutation = get<std::vector<int>>(j, "permutation");
  d.ground_truth = get<std::vector<int>>(j, "ground_truth");
  try {
    Permutation p(d.permutation);
  } catch (const Error& e) {
    bad(std::string("permutation is not a bijection: ") + e.what());
  }
  if (static_cast<int>(d.permutation.size()) != d.n_clips) bad("permutation length differs from n_clips");
  if (d.ground_truth != d.permutation) bad("ground_truth differs from permutation");
  if (j.contains("dominance")) {
    const auto s = get<std::string>(j, "dominance");
    if (s == "V") d.dominance = Modality::V;
    else if (s == "A") d.dominance = Modality::A;
    else bad("bad dominance");
  }
  if (j.contains("modality_vector")) {
    std::vector<ClipModality> v;
    for (const auto& s : get<std::vector<std::string>>(j, "modality_vector")) {
      const auto m = parse_clip_modality(s);
      if (!m) bad("bad modality token");
      v.push_back(*m);
    }
    if (static_cast<int>(v.size()) != d.n_clips) bad("modality_vector length differs from n_clips");
    d.modality_vector = std::move(v);
  }
  if (d.strategy == Strategy::Sms && !d.dominance) bad("sms puzzle without dominance");
  if (d.strategy == Strategy::Cmm && !d.modality_vector) bad("cmm puzzle without modality_vector");
  d.prompt_id = get<std::string>(j, "prompt_id");
  d.rng_seed = get<std::uint64_t>(j, "rng_seed");
  if (!j.contains("clip_meta") || !j.at("clip_meta").is_array()) bad("missing clip_meta");
  for (const auto& c : j.at("clip_meta")) {
    ClipMeta m;
    m.position = get<int>(c, "position");
    m.file = get<std::string>(c, "file");
    m.duration_s = get<double>(c, "duration_s");
    m.n_frames = get<int>(c, "n_frames");
    m.width = get<int>(c, "width");
    m.height = get<int>(c, "height");
    m.video_present = get<bool>(c, "video_present");
    m.audio_present = get<bool>(c, "audio_present");
    d.clip_meta.push_back(std::move(m));
  }
  if (static_cast<int>(d.clip_meta.size()) != d.n_clips) bad("clip_meta length differs from n_clips");
  return d;
}

PuzzleDocument load_puzzle_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
  return puzzle_document_from_json(j);
}

std::string dump_line(const ordered_json& j) { return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace); }

}  // namespace omnijigsaw
