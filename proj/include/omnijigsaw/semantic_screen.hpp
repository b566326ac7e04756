#pragma once

// Stage-2 semantic screening against an external assessor model.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnijigsaw/inference.hpp"
#include "omnijigsaw/types.hpp"

namespace omnijigsaw {

inline constexpr std::size_t kMinThinkChars = 20;

struct ScreeningVerdict {
  std::string think_text;
  Decision decision = Decision::No;
  bool coherent = false;
  std::string raw;

  bool retained() const { return decision == Decision::Yes && coherent; }
};

/// Fail-closed: anything but a ≥20-character <think> block followed by an
/// exact YES/NO answer token yields NO or incoherent.
ScreeningVerdict parse_verdict(std::string_view raw);

/// Screening request: the prompt text preceded by up to max_frames uniformly
/// spaced frames, rescaled to max_pixels, and optionally the soundtrack.
ChatRequest screening_request(const OmniSample& sample, const InferenceConfig& config);

/// Completion text; retried on transport failure. Throws the last transport error.
std::string query_assessor(const OmniSample& sample, const InferenceConfig& config, InferenceClient& client);

/// Stage2Report for one sample. Transport failures give deferred=true, pass=false.
Stage2Report screen_sample(const OmniSample& sample, const InferenceConfig& config, InferenceClient& client);

/// Screens every sample, `workers` at a time; results are in input order.
std::vector<Stage2Report> run_stage2(std::span<const OmniSample> samples, const InferenceConfig& config,
                                     InferenceClient& client, int workers = 1);

}  // namespace omnijigsaw
