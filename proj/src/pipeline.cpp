#include "omnijigsaw/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

#include "json.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/package.hpp"
#include "omnijigsaw/puzzle_builder.hpp"
#include "omnijigsaw/semantic_screen.hpp"
#include "omnijigsaw/serialize.hpp"

namespace omnijigsaw {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kMediaExtensions = {".ojm", ".mp4", ".mkv", ".webm", ".mov", ".avi", ".m4v"};

bool is_transport(ErrorCode c) {
  return c == ErrorCode::EndpointUnreachable || c == ErrorCode::Timeout || c == ErrorCode::HttpError;
}

}  // namespace

std::vector<InputFile> list_inputs(const fs::path& input_dir, const fs::path& exclude) {
  if (!fs::is_directory(input_dir)) throw Error(ErrorCode::Config, "input directory not found: " + input_dir.string());
  const fs::path excluded = exclude.empty() ? fs::path() : fs::weakly_canonical(exclude);
  std::vector<InputFile> out;
  for (auto it = fs::recursive_directory_iterator(input_dir); it != fs::recursive_directory_iterator(); ++it) {
    if (it->is_directory() && !excluded.empty() && fs::weakly_canonical(it->path()) == excluded) {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file()) continue;
    std::string ext = it->path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!kMediaExtensions.count(ext)) continue;
    InputFile f;
    f.path = it->path();
    const fs::path rel = fs::relative(it->path(), input_dir);
    f.relative = rel.generic_string();
    f.sample_id = it->path().stem().string();
    f.source_tag = std::distance(rel.begin(), rel.end()) > 1 ? rel.begin()->string() : "default";
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const InputFile& a, const InputFile& b) { return a.relative < b.relative; });
  std::set<std::string> ids;
  for (const auto& f : out) {
    if (!ids.insert(f.sample_id).second) throw Error(ErrorCode::Config, "duplicate sample id '" + f.sample_id + "'");
  }
  return out;
}

namespace {

struct Context {
  const PipelineOptions& opt;
  const MediaDecoder& decoder;
  const SpeechActivityDetector& detector;
  InferenceClient* client;
  Standardizer standardizer;
};

ManifestRecord base_record(const InputFile& f, Stage stage) {
  ManifestRecord r;
  r.sample_id = f.sample_id;
  r.source_path = f.relative;
  r.source_tag = f.source_tag;
  r.stage = stage;
  return r;
}

// Every record the sample gains this run, given where it stopped before.
std::vector<ManifestRecord> process(const Context& ctx, const InputFile& f, const std::optional<ManifestRecord>& prior) {
  std::vector<ManifestRecord> out;
  const PipelineConfig& cfg = ctx.opt.config;
  const Stage from = prior ? prior->stage : Stage::Probed;
  const bool fresh = !prior;

  if (fresh) out.push_back(base_record(f, Stage::Probed));

  std::optional<OmniSample> decoded;
  FilterReport report = run_stage1(f.path, ctx.decoder, cfg.filter, ctx.detector, &decoded);
  report.sample_id = f.sample_id;
  if (decoded) {
    decoded->id = f.sample_id;
    decoded->source_tag = f.source_tag;
    decoded->source_path = f.relative;
  }

  if (fresh || from == Stage::Probed) {
    ManifestRecord r = base_record(f, report.stage1.pass ? Stage::S1Pass : Stage::S1Reject);
    r.report = report;
    out.push_back(r);
    if (!report.stage1.pass) return out;
    if (cfg.standardize) ctx.standardizer.standardize(f.path, ctx.opt.output_dir / "standardized");
  } else if (!report.stage1.pass || !decoded) {
    ManifestRecord r = base_record(f, Stage::BuildFailed);
    r.report = prior->report;
    r.error = "source no longer passes stage 1 on resume";
    out.push_back(r);
    return out;
  }
  if (ctx.opt.until == RunUntil::Stage1) return out;

  if (from == Stage::S2Pass && prior->report && prior->report->stage2) {
    report.stage2 = prior->report->stage2;
  } else {
    report.stage2 = screen_sample(*decoded, cfg.inference, *ctx.client);
    const Stage s = report.stage2->deferred ? Stage::Deferred : report.stage2->pass ? Stage::S2Pass : Stage::S2Reject;
    ManifestRecord r = base_record(f, s);
    r.report = report;
    out.push_back(r);
    if (s != Stage::S2Pass) return out;
  }
  if (ctx.opt.until == RunUntil::Stage2) return out;

  try {
    BuildConfig bc = cfg.build;
    const PuzzleInstance puzzle = build_puzzle(*decoded, cfg.strategy, bc, ctx.client, cfg.inference);
    const fs::path rel = fs::path("puzzles") / f.sample_id;
    write_puzzle_package(puzzle, ctx.opt.output_dir / rel, bc.audio_rate_hz);
    ManifestRecord r = base_record(f, Stage::Built);
    r.report = report;
    r.puzzle_path = (rel / "puzzle.json").generic_string();
    out.push_back(r);
  } catch (const Error& e) {
    ManifestRecord r = base_record(f, is_transport(e.code()) ? Stage::Deferred : Stage::BuildFailed);
    r.report = report;
    r.error = std::string(to_string(e.code())) + ": " + e.what();
    out.push_back(r);
  }
  return out;
}

bool reached(Stage s, RunUntil until) {
  if (is_terminal(s)) return true;
  switch (until) {
    case RunUntil::Stage1: return s == Stage::S1Pass;
    case RunUntil::Stage2: return s == Stage::S2Pass;
    case RunUntil::Built: return false;
  }
  return false;
}

}  // namespace

PipelineResult run_pipeline(const PipelineOptions& options) {
  const PipelineConfig& cfg = options.config;
  cfg.validate();
  const fs::path manifest_path = options.output_dir / "manifest.jsonl";
  if (!options.resume && fs::exists(manifest_path) && fs::file_size(manifest_path) > 0)
    throw Error(ErrorCode::Config, manifest_path.string() + " already exists; rerun with --resume");

  std::vector<InputFile> inputs = list_inputs(options.input_dir, options.output_dir);

  std::unique_ptr<InferenceClient> owned_client;
  InferenceClient* client = options.client;
  const bool needs_model = options.until != RunUntil::Stage1;
  if (needs_model && !client) {
    InferenceConfig ic = cfg.inference;
    ic.endpoint_url = resolve_endpoint_url(ic.endpoint_url);
    if (ic.api_key.empty()) ic.api_key = resolve_api_key();
    if (ic.endpoint_url.empty())
      throw Error(ErrorCode::Config, "screening needs an endpoint: set endpoint_url, --endpoint-url or OMNIJIGSAW_ENDPOINT_URL");
    std::optional<fs::path> audit;
    if (cfg.audit_log) audit = options.output_dir / "inference_audit.jsonl";
    owned_client = std::make_unique<HttpInferenceClient>(ic, audit);
    client = owned_client.get();
  }

  fs::create_directories(options.output_dir);
  Manifest manifest(manifest_path, cfg.wall_clock_timestamps);

  const MediaRegistry registry;
  const EnergyVad vad(cfg.vad);
  const Context ctx{options, options.decoder ? *options.decoder : registry,
                    options.detector ? *options.detector : vad, client, Standardizer(cfg.transcoder)};

  std::vector<std::size_t> todo;
  std::vector<std::optional<ManifestRecord>> prior(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    prior[i] = manifest.latest(inputs[i].sample_id);
    if (!prior[i] || !reached(prior[i]->stage, options.until)) todo.push_back(i);
  }
  spdlog::info("{} inputs, {} need work", inputs.size(), todo.size());

  // Workers fill slots in any order; the committer appends them in input order.
  std::vector<std::optional<std::vector<ManifestRecord>>> slots(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < todo.size(); k = next++) {
      const std::size_t i = todo[k];
      std::vector<ManifestRecord> recs;
      try {
        recs = process(ctx, inputs[i], prior[i]);
      } catch (const std::exception& e) {
        spdlog::error("{}: {}", inputs[i].sample_id, e.what());
        ManifestRecord r = base_record(inputs[i], Stage::BuildFailed);
        r.error = e.what();
        recs.push_back(std::move(r));
      }
      {
        std::lock_guard lock(mu);
        slots[k] = std::move(recs);
      }
      cv.notify_all();
    }
  };
  const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(todo.size())));
  std::vector<std::jthread> pool;
  for (int t = 0; t < n_workers && !todo.empty(); ++t) pool.emplace_back(worker);

  PipelineResult result;
  result.samples = inputs.size();
  for (std::size_t k = 0; k < todo.size(); ++k) {
    std::vector<ManifestRecord> recs;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return slots[k].has_value(); });
      recs = std::move(*slots[k]);
      slots[k].reset();
    }
    for (auto& r : recs) manifest.append(std::move(r));
    if (!recs.empty()) ++result.processed;
  }
  pool.clear();

  for (const auto& f : inputs) {
    const auto latest = manifest.latest(f.sample_id);
    if (latest) ++result.final_stages[latest->stage];
  }
  result.exit_code = result.final_stages.count(Stage::Deferred) ? kExitPartial : kExitOk;
  return result;
}

std::size_t score_jsonl(std::istream& in, std::ostream& out, const RewardConfig& defaults) {
  std::map<std::string, std::vector<int>> truth_cache;
  std::size_t bad = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("response") || !j["response"].is_string())
        throw Error(ErrorCode::InvalidJson, "request needs a string 'response'");
      const bool has_path = j.contains("puzzle_path");
      const bool has_truth = j.contains("ground_truth");
      if (has_path == has_truth) throw Error(ErrorCode::InvalidJson, "give exactly one of puzzle_path, ground_truth");
      RewardConfig rc = defaults;
      if (j.contains("tag_style")) {
        const auto s = j["tag_style"].is_string() ? parse_tag_style(j["tag_style"].get<std::string>()) : std::nullopt;
        if (!s) throw Error(ErrorCode::InvalidJson, "tag_style must be think or thinking");
        rc.tag_style = *s;
      }
      if (j.contains("continuity")) {
        const auto m = j["continuity"].is_string() ? parse_continuity_mode(j["continuity"].get<std::string>())
                                                   : std::nullopt;
        if (!m) throw Error(ErrorCode::InvalidJson, "continuity must be aligned or adjacency");
        rc.continuity = *m;
      }
      std::vector<int> truth;
      if (has_path) {
        const std::string p = j["puzzle_path"].get<std::string>();
        auto it = truth_cache.find(p);
        if (it == truth_cache.end()) it = truth_cache.emplace(p, load_puzzle_document(p).ground_truth).first;
        truth = it->second;
      } else {
        truth = j["ground_truth"].get<std::vector<int>>();
        Permutation check(truth);
      }
      out << dump_line(to_json(total_reward(j["response"].get<std::string>(), truth, rc))) << '\n';
    } catch (const std::exception& e) {
      ++bad;
      ordered_json j = to_json(RewardBreakdown{});
      j["error"] = e.what();
      out << dump_line(j) << '\n';
    }
  }
  out.flush();
  return bad;
}

}  // namespace omnijigsaw
