#include "omnijigsaw/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "omnijigsaw/error.hpp"

namespace omnijigsaw {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Field {
  std::string key;
  std::function<void(PipelineConfig&, const json&)> set;
  std::function<ordered_json(const PipelineConfig&)> get;
};

[[noreturn]] void type_error(const std::string& key, const char* want) {
  throw Error(ErrorCode::Config, "config key '" + key + "' must be " + want);
}

template <typename T>
T convert(const json& v, const std::string& key) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) type_error(key, "a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) type_error(key, "a string");
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, Strategy>) {
    const auto s = v.is_string() ? parse_strategy(v.get<std::string>()) : std::nullopt;
    if (!s) type_error(key, "one of jmi, sms, cmm, video, audio");
    return *s;
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) type_error(key, "a number");
    return v.get<T>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) type_error(key, "a non-negative integer");
    return v.get<T>();
  } else {
    if (!v.is_number_integer()) type_error(key, "an integer");
    return v.get<T>();
  }
}

template <typename Ref>
Field field(std::string key, Ref ref) {
  using T = std::remove_reference_t<decltype(ref(std::declval<PipelineConfig&>()))>;
  return {key,
          [ref, key](PipelineConfig& c, const json& v) { ref(c) = convert<T>(v, key); },
          [ref](const PipelineConfig& c) {
            const T& value = ref(const_cast<PipelineConfig&>(c));
            if constexpr (std::is_same_v<T, Strategy>) return ordered_json(std::string(to_string(value)));
            else return ordered_json(value);
          }};
}

#define OJ_FIELD(key, expr) field(key, [](PipelineConfig& c) -> auto& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      OJ_FIELD("d_max_s", c.filter.d_max_s),
      OJ_FIELD("frame_interval_s", c.filter.frame_interval_s),
      OJ_FIELD("mad_threshold", c.filter.mad_threshold),
      OJ_FIELD("max_static_ratio", c.filter.max_static_ratio),
      OJ_FIELD("sample_rate_hz", c.filter.sample_rate_hz),
      OJ_FIELD("rms_silence_db", c.filter.rms_silence_db),
      OJ_FIELD("max_silence_ratio", c.filter.max_silence_ratio),
      OJ_FIELD("min_flux_variance", c.filter.min_flux_variance),
      OJ_FIELD("vad_min", c.filter.vad_min),
      OJ_FIELD("vad_max", c.filter.vad_max),
      OJ_FIELD("vad_frame_ms", c.vad.frame_ms),
      OJ_FIELD("vad_relative_db", c.vad.relative_db),
      OJ_FIELD("vad_absolute_db", c.vad.absolute_db),
      OJ_FIELD("vad_zcr_min", c.vad.zcr_min),
      OJ_FIELD("vad_zcr_max", c.vad.zcr_max),
      OJ_FIELD("vad_min_speech_ms", c.vad.min_speech_ms),
      OJ_FIELD("vad_max_gap_ms", c.vad.max_gap_ms),
      OJ_FIELD("n_clips", c.build.n_clips),
      OJ_FIELD("trim_ratio", c.build.trim_ratio),
      OJ_FIELD("target_fps", c.build.target_fps),
      OJ_FIELD("min_frames", c.build.min_frames),
      OJ_FIELD("max_frames", c.build.max_frames),
      OJ_FIELD("pixel_budget", c.build.pixel_budget),
      OJ_FIELD("patch", c.build.patch),
      OJ_FIELD("audio_rate_hz", c.build.audio_rate_hz),
      OJ_FIELD("judge_fps", c.build.judge_fps),
      OJ_FIELD("judge_max_frames", c.build.judge_max_frames),
      OJ_FIELD("rng_seed", c.build.rng_seed),
      OJ_FIELD("min_clip_s", c.build.min_clip_s),
      OJ_FIELD("max_audio_s", c.build.max_audio_s),
      OJ_FIELD("selector_retries", c.build.selector_retries),
      OJ_FIELD("screen_max_frames", c.inference.max_frames),
      OJ_FIELD("screen_max_pixels", c.inference.max_pixels),
      OJ_FIELD("temperature", c.inference.temperature),
      OJ_FIELD("top_p", c.inference.top_p),
      OJ_FIELD("top_k", c.inference.top_k),
      OJ_FIELD("repetition_penalty", c.inference.repetition_penalty),
      OJ_FIELD("max_new_tokens", c.inference.max_new_tokens),
      OJ_FIELD("endpoint_url", c.inference.endpoint_url),
      OJ_FIELD("model", c.inference.model),
      OJ_FIELD("timeout_s", c.inference.timeout_s),
      OJ_FIELD("retries", c.inference.retries),
      OJ_FIELD("retry_backoff_s", c.inference.retry_backoff_s),
      OJ_FIELD("max_in_flight", c.inference.max_in_flight),
      OJ_FIELD("rate_limit_per_s", c.inference.rate_limit_per_s),
      OJ_FIELD("screen_include_audio", c.inference.include_audio),
      OJ_FIELD("strategy", c.strategy),
      OJ_FIELD("workers", c.workers),
      OJ_FIELD("standardize", c.standardize),
      OJ_FIELD("transcoder", c.transcoder),
      OJ_FIELD("wall_clock_timestamps", c.wall_clock_timestamps),
      OJ_FIELD("audit_log", c.audit_log),
  };
  return table;
}

#undef OJ_FIELD

}  // namespace

void PipelineConfig::validate() const {
  filter.validate();
  build.validate();
  inference.validate();
  if (workers < 1) throw Error(ErrorCode::Config, "workers must be at least 1");
  if (!(vad.frame_ms > 0.0)) throw Error(ErrorCode::Config, "vad_frame_ms must be positive");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

PipelineConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  PipelineConfig c;
  const auto& table = fields();
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
    it->set(c, value);
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const PipelineConfig& config) {
  ordered_json j;
  for (const auto& f : fields()) j[f.key] = f.get(config);
  return j.dump(2);
}

}  // namespace omnijigsaw
