#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace omnijigsaw {

enum class ErrorCode {
  Unreadable,
  NotMedia,
  TooFewFrames,
  EmptyAudio,
  DetectorFailure,
  EndpointUnreachable,
  Timeout,
  HttpError,
  TooShort,
  NTooSmall,
  NTooLarge,
  VectorLengthMismatch,
  MissingDominance,
  UnparseableDominance,
  InvalidJson,
  BadLength,
  BadToken,
  NoAudioStream,
  NonIntegerToken,
  EmptyAnswer,
  CorruptManifest,
  Config,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace omnijigsaw
