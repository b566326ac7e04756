#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace omnijigsaw::audio {

/// Analysis framing shared by the RMS and spectral-flux features.
inline constexpr std::size_t kWindow = 2048;
inline constexpr std::size_t kHop = 512;

/// Frame count for `n` samples: 1 + floor((n - window) / hop), or 1 for a
/// signal shorter than one window (zero-padded). 0 for empty input.
std::size_t frame_count(std::size_t n, std::size_t window = kWindow, std::size_t hop = kHop);

/// Per-frame root-mean-square energy; missing tail samples count as zero.
std::vector<double> frame_rms(std::span<const float> x, std::size_t window = kWindow, std::size_t hop = kHop);

/// Hann-windowed short-time magnitude spectra, window/2+1 bins per frame.
std::vector<std::vector<double>> stft_magnitude(std::span<const float> x, std::size_t window = kWindow,
                                                std::size_t hop = kHop);

/// Periodic Hann window of the given length.
std::vector<double> hann(std::size_t n);

/// Band-limited resampling with a Hann-windowed sinc kernel.
std::vector<float> resample(std::span<const float> x, int from_hz, int to_hz);

/// 16-bit PCM mono WAV bytes.
std::vector<std::uint8_t> encode_wav(std::span<const float> x, int sample_rate_hz);

}  // namespace omnijigsaw::audio
