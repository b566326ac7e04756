#include "omnijigsaw/prompts.hpp"

#include <array>

#include "omnijigsaw/error.hpp"
#include "prompt_assets.hpp"

namespace omnijigsaw::prompts {
namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string clip_list(int n, std::string_view tag, std::string_view sep) {
  std::string out;
  for (int i = 1; i <= n; ++i) {
    if (i > 1) out += sep;
    out += "Clip " + std::to_string(i) + ": <" + std::string(tag) + ">";
  }
  return out;
}

}  // namespace

std::vector<std::string_view> ids() {
  std::vector<std::string_view> out;
  for (const auto& a : detail::kPromptAssets) out.push_back(a.id);
  return out;
}

std::string_view asset(std::string_view id) {
  for (const auto& a : detail::kPromptAssets) {
    if (a.id == id) return a.text;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown prompt id: " + std::string(id));
}

std::string render(std::string_view id, int n_clips) {
  if (n_clips < 1) throw Error(ErrorCode::InvalidArgument, "n_clips must be positive");
  std::string s(asset(id));
  replace_all(s, "{{n_clips}}", std::to_string(n_clips));
  replace_all(s, "{{clip_list:video}}", clip_list(n_clips, "video", "\n"));
  replace_all(s, "{{clip_list:audio}}", clip_list(n_clips, "audio", "\n"));
  replace_all(s, "{{clip_list_inline:video}}", clip_list(n_clips, "video", " "));
  return s;
}

std::string_view rollout_prompt_id(Strategy strategy, std::optional<Modality> dominance) {
  switch (strategy) {
    case Strategy::Jmi: return kJmiRollout;
    case Strategy::Sms:
      if (!dominance) throw Error(ErrorCode::MissingDominance, "SMS rollout prompt needs a dominance decision");
      return *dominance == Modality::V ? kVideoRollout : kAudioRollout;
    case Strategy::Cmm: return kCmmRollout;
    case Strategy::Video: return kVideoRollout;
    case Strategy::Audio: return kAudioRollout;
  }
  return kJmiRollout;
}

std::vector<Segment> split_media(std::string_view rendered) {
  constexpr std::string_view kVideo = "<video>";
  constexpr std::string_view kAudio = "<audio>";
  std::vector<Segment> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t v = rendered.find(kVideo, start);
    const std::size_t a = rendered.find(kAudio, start);
    const std::size_t next = std::min(v, a);
    if (next == std::string_view::npos) {
      out.push_back({std::string(rendered.substr(start)), Segment::Media::None});
      return out;
    }
    out.push_back({std::string(rendered.substr(start, next - start)), next == v ? Segment::Media::Video : Segment::Media::Audio});
    start = next + kVideo.size();
  }
}

}  // namespace omnijigsaw::prompts
