// omnijigsaw: corpus curation, puzzle building and rollout scoring.
//
//   omnijigsaw probe <media>
//   omnijigsaw filter|screen|build <input_dir> <output_dir> [--config f] [--strategy s] ...
//   omnijigsaw score [--tag-style thinking] [--continuity aligned] < requests.jsonl
//   omnijigsaw stats <output_dir|manifest.jsonl>
//   omnijigsaw gen-fixtures <dir> [--seed n]
//   omnijigsaw config [--config f]

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "omnijigsaw/config.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/fixtures.hpp"
#include "omnijigsaw/manifest.hpp"
#include "omnijigsaw/media.hpp"
#include "omnijigsaw/pipeline.hpp"
#include "omnijigsaw/reward.hpp"
#include "omnijigsaw/serialize.hpp"
#include "omnijigsaw/signal_filter.hpp"

namespace fs = std::filesystem;
using namespace omnijigsaw;

namespace {

struct CommonFlags {
  std::string config;
  std::string strategy;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string endpoint_url;
  bool resume = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "flat JSON config file");
  cmd->add_option("--strategy", f.strategy, "jmi, sms, cmm, video or audio");
  cmd->add_option("--seed", f.seed, "corpus seed for permutations");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--endpoint-url", f.endpoint_url, "assessor endpoint (else OMNIJIGSAW_ENDPOINT_URL)");
  cmd->add_flag("--resume", f.resume, "continue an existing output directory");
}

PipelineConfig effective_config(const CommonFlags& f) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig{} : load_config(f.config);
  if (!f.strategy.empty()) {
    auto s = parse_strategy(f.strategy);
    if (!s) throw Error(ErrorCode::Config, "unknown strategy '" + f.strategy + "'");
    cfg.strategy = *s;
  }
  if (f.seed) cfg.build.rng_seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  if (!f.endpoint_url.empty()) cfg.inference.endpoint_url = f.endpoint_url;
  cfg.validate();
  return cfg;
}

int run_stages(const CommonFlags& f, const std::string& in, const std::string& out, RunUntil until) {
  PipelineOptions opt;
  opt.input_dir = in;
  opt.output_dir = out;
  opt.config = effective_config(f);
  opt.until = until;
  opt.resume = f.resume;
  const PipelineResult r = run_pipeline(opt);
  for (const auto& [stage, n] : r.final_stages) std::cout << to_string(stage) << ' ' << n << '\n';
  spdlog::info("{} samples, {} processed", r.samples, r.processed);
  return r.exit_code;
}

int cmd_probe(const std::string& path) {
  const MediaRegistry registry;
  const MediaMeta m = probe_media(path, registry);
  ordered_json j;
  j["path"] = path;
  j["duration_s"] = m.duration_s;
  j["has_video"] = m.has_video;
  j["has_audio"] = m.has_audio;
  j["width"] = m.width;
  j["height"] = m.height;
  j["n_frames"] = m.n_frames;
  j["sample_rate_hz"] = m.source_sample_rate_hz;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_stats(const fs::path& target) {
  const fs::path manifest = fs::is_directory(target) ? target / "manifest.jsonl" : target;
  const auto records = read_manifest(manifest);
  std::cout << format_stats_table(aggregate_stats(records));
  return kExitOk;
}

int cmd_score(const std::string& tag_style, const std::string& continuity) {
  RewardConfig rc;
  if (!tag_style.empty()) {
    auto s = parse_tag_style(tag_style);
    if (!s) throw Error(ErrorCode::Config, "unknown tag style '" + tag_style + "'");
    rc.tag_style = *s;
  }
  if (!continuity.empty()) {
    auto c = parse_continuity_mode(continuity);
    if (!c) throw Error(ErrorCode::Config, "unknown continuity mode '" + continuity + "'");
    rc.continuity = *c;
  }
  const std::size_t bad = score_jsonl(std::cin, std::cout, rc);
  std::cout.flush();
  if (bad) spdlog::warn("{} malformed score requests", bad);
  return kExitOk;
}

int cmd_gen_fixtures(const fs::path& dir, std::uint64_t seed) {
  const auto labels = fixtures::gen_fixtures(dir, seed);
  std::size_t pass = 0;
  for (const auto& l : labels) pass += l.expected_stage1 == "PASS";
  std::cout << labels.size() << " fixtures (" << pass << " designed to pass) in " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal-reordering puzzle toolkit for audio-visual corpora"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  CommonFlags flags;
  std::string in_dir, out_dir, media_path, stats_target, fixture_dir, tag_style, continuity;
  std::uint64_t fixture_seed = 0;

  auto* probe = app.add_subcommand("probe", "print container metadata for one media file");
  probe->add_option("media", media_path)->required();

  struct StageCmd {
    const char* name;
    const char* help;
    RunUntil until;
  };
  const StageCmd stage_cmds[] = {
      {"filter", "stage 1 signal filtering", RunUntil::Stage1},
      {"screen", "stage 1 then semantic screening", RunUntil::Stage2},
      {"build", "full pipeline through puzzle packages", RunUntil::Built},
      {"run", "alias for build", RunUntil::Built},
  };
  std::vector<std::pair<CLI::App*, RunUntil>> stage_apps;
  for (const auto& sc : stage_cmds) {
    auto* cmd = app.add_subcommand(sc.name, sc.help);
    cmd->add_option("input_dir", in_dir)->required();
    cmd->add_option("output_dir", out_dir)->required();
    add_common(cmd, flags);
    stage_apps.emplace_back(cmd, sc.until);
  }

  auto* score = app.add_subcommand("score", "grade JSONL rollouts from stdin");
  score->add_option("--tag-style", tag_style, "think or thinking");
  score->add_option("--continuity", continuity, "aligned or adjacency");

  auto* stats = app.add_subcommand("stats", "per-source stage counts from a manifest");
  stats->add_option("target", stats_target, "output directory or manifest path")->required();

  auto* gen = app.add_subcommand("gen-fixtures", "write the synthetic fixture corpus");
  gen->add_option("dir", fixture_dir)->required();
  gen->add_option("--seed", fixture_seed);

  auto* config = app.add_subcommand("config", "print the effective configuration");
  config->add_option("--config", flags.config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (auto lvl = spdlog::level::from_str(log_level); lvl != spdlog::level::off || log_level == "off")
    spdlog::set_level(lvl);
  spdlog::set_pattern("[%l] %v");

  try {
    if (probe->parsed()) return cmd_probe(media_path);
    for (const auto& [cmd, until] : stage_apps)
      if (cmd->parsed()) return run_stages(flags, in_dir, out_dir, until);
    if (score->parsed()) return cmd_score(tag_style, continuity);
    if (stats->parsed()) return cmd_stats(stats_target);
    if (gen->parsed()) return cmd_gen_fixtures(fixture_dir, fixture_seed);
    if (config->parsed()) {
      std::cout << dump_config(effective_config(flags)) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
