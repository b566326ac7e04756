#pragma once

// Prompt templates shipped as immutable text assets (assets/prompts/*.txt),
// embedded at build time. Templates that depend on the clip count carry
// `{{n_clips}}`, `{{clip_list:video|audio}}` and `{{clip_list_inline:video}}`
// placeholders; rendering with N=6 yields the canonical wording.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omnijigsaw/types.hpp"

namespace omnijigsaw::prompts {

inline constexpr std::string_view kSemanticScreening = "semantic_screening";
inline constexpr std::string_view kJmiRollout = "jmi_rollout";
inline constexpr std::string_view kSmsJudge = "sms_judge";
inline constexpr std::string_view kVideoRollout = "video_rollout";
inline constexpr std::string_view kAudioRollout = "audio_rollout";
inline constexpr std::string_view kCmmSelector = "cmm_selector";
inline constexpr std::string_view kCmmRollout = "cmm_rollout";

std::vector<std::string_view> ids();

/// Raw asset bytes. Throws Error(InvalidArgument) for unknown ids.
std::string_view asset(std::string_view id);

/// Asset with placeholders substituted for `n_clips` clips.
std::string render(std::string_view id, int n_clips);

/// Rollout prompt bound into a puzzle for the given strategy.
std::string_view rollout_prompt_id(Strategy strategy, std::optional<Modality> dominance = std::nullopt);

/// Splits rendered text around `<video>` / `<audio>` media placeholders.
struct Segment {
  std::string text;
  enum class Media { None, Video, Audio } media = Media::None;  // placeholder that follows `text`
};
std::vector<Segment> split_media(std::string_view rendered);

}  // namespace omnijigsaw::prompts
