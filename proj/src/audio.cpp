#include "omnijigsaw/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "omnijigsaw/error.hpp"

namespace omnijigsaw::audio {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void magnitudes(std::vector<double>& mags) {
    fftw_execute(plan_);
    mags.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

RealFft& fft_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

std::size_t frame_count(std::size_t n, std::size_t window, std::size_t hop) {
  if (n == 0) return 0;
  if (n <= window) return 1;
  return 1 + (n - window) / hop;
}

std::vector<double> frame_rms(std::span<const float> x, std::size_t window, std::size_t hop) {
  const std::size_t frames = frame_count(x.size(), window, hop);
  std::vector<double> rms(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t begin = f * hop;
    const std::size_t end = std::min(begin + window, x.size());
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += static_cast<double>(x[i]) * x[i];
    rms[f] = std::sqrt(acc / static_cast<double>(window));
  }
  return rms;
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

std::vector<std::vector<double>> stft_magnitude(std::span<const float> x, std::size_t window, std::size_t hop) {
  const std::size_t frames = frame_count(x.size(), window, hop);
  const auto w = hann(window);
  RealFft& fft = fft_for(window);
  std::vector<std::vector<double>> spec(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double* in = fft.input();
    const std::size_t begin = f * hop;
    for (std::size_t i = 0; i < window; ++i) {
      const std::size_t idx = begin + i;
      in[i] = idx < x.size() ? static_cast<double>(x[idx]) * w[i] : 0.0;
    }
    fft.magnitudes(spec[f]);
  }
  return spec;
}

std::vector<float> resample(std::span<const float> x, int from_hz, int to_hz) {
  if (from_hz <= 0 || to_hz <= 0) throw Error(ErrorCode::InvalidArgument, "sample rates must be positive");
  if (from_hz == to_hz || x.empty()) return {x.begin(), x.end()};
  constexpr int kHalfTaps = 16;
  const double ratio = static_cast<double>(to_hz) / from_hz;
  const double cutoff = std::min(1.0, ratio);
  const double half_width = kHalfTaps / cutoff;
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * ratio));
  std::vector<float> out(n_out);
  const auto n_in = static_cast<long long>(x.size());
  for (std::size_t n = 0; n < n_out; ++n) {
    const double pos = static_cast<double>(n) / ratio;
    const auto lo = static_cast<long long>(std::ceil(pos - half_width));
    const auto hi = static_cast<long long>(std::floor(pos + half_width));
    double acc = 0.0;
    for (long long k = std::max(lo, 0LL); k <= std::min(hi, n_in - 1); ++k) {
      const double d = pos - static_cast<double>(k);
      const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * d / half_width);
      acc += x[static_cast<std::size_t>(k)] * cutoff * sinc(cutoff * d) * win;
    }
    out[n] = static_cast<float>(acc);
  }
  return out;
}

std::vector<std::uint8_t> encode_wav(std::span<const float> x, int sample_rate_hz) {
  std::vector<std::uint8_t> out;
  const auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  };
  const auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  const auto data_bytes = static_cast<std::uint32_t>(x.size() * 2);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(16);
  put16(1);
  put16(1);
  put32(static_cast<std::uint32_t>(sample_rate_hz));
  put32(static_cast<std::uint32_t>(sample_rate_hz) * 2);
  put16(2);
  put16(16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(data_bytes);
  for (float s : x) {
    const auto v = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0f, 1.0f) * 32767.0f));
    put16(static_cast<std::uint16_t>(v));
  }
  return out;
}

}  // namespace omnijigsaw::audio
