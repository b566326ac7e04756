#include "omnijigsaw/types.hpp"

#include <cctype>
#include <cmath>

#include "omnijigsaw/error.hpp"

namespace omnijigsaw {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Unreadable: return "UNREADABLE";
    case ErrorCode::NotMedia: return "NOT_MEDIA";
    case ErrorCode::TooFewFrames: return "TOO_FEW_FRAMES";
    case ErrorCode::EmptyAudio: return "EMPTY_AUDIO";
    case ErrorCode::DetectorFailure: return "DETECTOR_FAILURE";
    case ErrorCode::EndpointUnreachable: return "ENDPOINT_UNREACHABLE";
    case ErrorCode::Timeout: return "TIMEOUT";
    case ErrorCode::HttpError: return "HTTP_ERROR";
    case ErrorCode::TooShort: return "TOO_SHORT";
    case ErrorCode::NTooSmall: return "N_TOO_SMALL";
    case ErrorCode::NTooLarge: return "N_TOO_LARGE";
    case ErrorCode::VectorLengthMismatch: return "VECTOR_LENGTH_MISMATCH";
    case ErrorCode::MissingDominance: return "MISSING_DOMINANCE";
    case ErrorCode::UnparseableDominance: return "UNPARSEABLE_DOMINANCE";
    case ErrorCode::InvalidJson: return "INVALID_JSON";
    case ErrorCode::BadLength: return "BAD_LENGTH";
    case ErrorCode::BadToken: return "BAD_TOKEN";
    case ErrorCode::NoAudioStream: return "NO_AUDIO_STREAM";
    case ErrorCode::NonIntegerToken: return "NON_INTEGER_TOKEN";
    case ErrorCode::EmptyAnswer: return "EMPTY_ANSWER";
    case ErrorCode::CorruptManifest: return "CORRUPT_MANIFEST";
    case ErrorCode::Config: return "CONFIG_ERROR";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

void validate(const OmniSample& sample) {
  if (!(sample.duration_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample duration must be positive");
  if (sample.has_video && sample.video.empty()) throw Error(ErrorCode::InvalidArgument, "has_video set but no frames");
  if (sample.has_audio && sample.audio.samples.empty()) throw Error(ErrorCode::InvalidArgument, "has_audio set but no samples");
  for (std::size_t i = 1; i < sample.video.size(); ++i) {
    if (!(sample.video[i].timestamp_s > sample.video[i - 1].timestamp_s))
      throw Error(ErrorCode::InvalidArgument, "frame timestamps must be strictly increasing");
  }
  for (const auto& f : sample.video) {
    if (f.width <= 0 || f.height <= 0 || f.rgb.size() != f.pixel_count() * 3)
      throw Error(ErrorCode::InvalidArgument, "frame payload does not match its dimensions");
  }
}

Permutation::Permutation(std::vector<int> forward) : forward_(std::move(forward)) {
  const int n = static_cast<int>(forward_.size());
  inverse_.assign(forward_.size(), 0);
  for (int i = 1; i <= n; ++i) {
    const int p = forward_[static_cast<std::size_t>(i - 1)];
    if (p < 1 || p > n || inverse_[static_cast<std::size_t>(p - 1)] != 0)
      throw Error(ErrorCode::InvalidArgument, "permutation is not a bijection of {1..N}");
    inverse_[static_cast<std::size_t>(p - 1)] = i;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = i + 1;
  return Permutation(std::move(f));
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Jmi: return "JMI";
    case Strategy::Sms: return "SMS";
    case Strategy::Cmm: return "CMM";
    case Strategy::Video: return "VIDEO";
    case Strategy::Audio: return "AUDIO";
  }
  return "JMI";
}

std::string_view to_string(Modality m) { return m == Modality::V ? "V" : "A"; }

std::string_view to_string(ClipModality m) {
  switch (m) {
    case ClipModality::V: return "V";
    case ClipModality::A: return "A";
    case ClipModality::VA: return "VA";
  }
  return "VA";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "jmi") return Strategy::Jmi;
  if (lower == "sms") return Strategy::Sms;
  if (lower == "cmm") return Strategy::Cmm;
  if (lower == "video") return Strategy::Video;
  if (lower == "audio") return Strategy::Audio;
  return std::nullopt;
}

std::optional<ClipModality> parse_clip_modality(std::string_view s) {
  if (s == "V") return ClipModality::V;
  if (s == "A") return ClipModality::A;
  if (s == "VA") return ClipModality::VA;
  return std::nullopt;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::Invalid: return "INVALID";
    case RejectReason::TooLong: return "TOO_LONG";
    case RejectReason::MissingStream: return "MISSING_STREAM";
    case RejectReason::StaticVideo: return "STATIC_VIDEO";
    case RejectReason::Silence: return "SILENCE";
    case RejectReason::LowFlux: return "LOW_FLUX";
    case RejectReason::VadOutOfBounds: return "VAD_OUT_OF_BOUNDS";
    case RejectReason::VadError: return "VAD_ERROR";
    case RejectReason::SemanticNo: return "SEMANTIC_NO";
  }
  return "INVALID";
}

std::optional<RejectReason> parse_reject_reason(std::string_view s) {
  for (auto r : {RejectReason::Invalid, RejectReason::TooLong, RejectReason::MissingStream, RejectReason::StaticVideo,
                 RejectReason::Silence, RejectReason::LowFlux, RejectReason::VadOutOfBounds, RejectReason::VadError,
                 RejectReason::SemanticNo}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

void FilterConfig::validate() const {
  for (double v : {d_max_s, frame_interval_s, mad_threshold, max_static_ratio, rms_silence_db, max_silence_ratio,
                   min_flux_variance, vad_min, vad_max}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::Config, "filter thresholds must be finite");
  }
  if (!(vad_min < vad_max)) throw Error(ErrorCode::Config, "vad_bounds[0] must be below vad_bounds[1]");
  if (sample_rate_hz <= 0) throw Error(ErrorCode::Config, "sample_rate_hz must be positive");
  if (!(frame_interval_s > 0.0)) throw Error(ErrorCode::Config, "frame_interval_s must be positive");
}

}  // namespace omnijigsaw
