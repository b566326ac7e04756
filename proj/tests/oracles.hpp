#pragma once

// Reference implementations written independently of the library, used to
// cross-check it. Slow and direct on purpose.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace oracle {

struct Reward {
  double r_pos, r_cont, lambda, r_fmt, r_rep, r_total;
  bool perfect;
};

// Well-formatted, non-repetitive rollout whose answer parses to `pred`.
inline Reward formatted_reward(const std::vector<int>& pred, const std::vector<int>& truth) {
  const std::size_t n = truth.size();
  Reward r{};
  if (pred.size() == n) {
    int same = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (pred[i] == truth[i]) ++same;
    r.r_pos = static_cast<double>(same) / static_cast<double>(n);
    int pairs = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (pred[i] == truth[i] && pred[i + 1] == truth[i + 1]) ++pairs;
    r.r_cont = n > 1 ? static_cast<double>(pairs) / static_cast<double>(n - 1) : 0.0;
  }
  r.perfect = pred == truth;
  r.lambda = r.perfect ? 1.0 : 0.2;
  r.r_fmt = 0.2;
  r.r_rep = 0.0;
  r.r_total = r.r_rep + r.r_fmt + r.lambda * (0.5 * r.r_pos + 0.5 * r.r_cont);
  return r;
}

// All permutations of 1..n by recursive insertion, sorted lexicographically.
inline std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<std::vector<int>> out{{}};
  for (int v = 1; v <= n; ++v) {
    std::vector<std::vector<int>> next;
    for (const auto& p : out)
      for (std::size_t at = 0; at <= p.size(); ++at) {
        auto q = p;
        q.insert(q.begin() + static_cast<std::ptrdiff_t>(at), v);
        next.push_back(q);
      }
    out = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Periodic Hann, O(N²) DFT magnitudes per frame, mean half-wave rectified rise.
inline std::vector<double> onset_strength(const std::vector<float>& x, std::size_t window = 2048,
                                          std::size_t hop = 512) {
  if (x.empty()) return {};
  const std::size_t frames = x.size() <= window ? 1 : 1 + (x.size() - window) / hop;
  const std::size_t bins = window / 2 + 1;
  std::vector<std::vector<double>> mag(frames, std::vector<double>(bins));
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<double> seg(window, 0.0);
    for (std::size_t i = 0; i < window; ++i) {
      const std::size_t idx = f * hop + i;
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / window);
      seg[i] = idx < x.size() ? x[idx] * w : 0.0;
    }
    for (std::size_t k = 0; k < bins; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < window; ++i)
        acc += seg[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i % window) / window);
      mag[f][k] = std::abs(acc);
    }
  }
  std::vector<double> env;
  for (std::size_t f = 1; f < frames; ++f) {
    double s = 0.0;
    for (std::size_t k = 0; k < bins; ++k) s += std::max(0.0, mag[f][k] - mag[f - 1][k]);
    env.push_back(s / static_cast<double>(bins));
  }
  return env;
}

inline double variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

// Span arithmetic for uniform segmentation with symmetric trimming, in seconds.
struct Span {
  double start, duration;
};
inline std::vector<Span> trimmed_spans(double duration_s, int n, double trim_ratio) {
  std::vector<Span> out;
  const double span = duration_s / n;
  for (int i = 0; i < n; ++i) out.push_back({i * span + trim_ratio * span, span * (1.0 - 2.0 * trim_ratio)});
  return out;
}

// Largest patch-aligned size within the budget that keeps the aspect ratio,
// by search over candidate widths.
inline std::pair<int, int> rescale_search(int w, int h, long budget, int patch) {
  if (static_cast<long>(w) * h <= budget) return {std::max(patch, w / patch * patch), std::max(patch, h / patch * patch)};
  const double s = std::sqrt(static_cast<double>(budget) / (static_cast<double>(w) * h));
  int bw = std::max(patch, static_cast<int>(std::floor(w * s / patch)) * patch);
  int bh = std::max(patch, static_cast<int>(std::floor(h * s / patch)) * patch);
  while (static_cast<long>(bw) * bh > budget) (bw >= bh ? bw : bh) -= patch;
  return {bw, bh};
}

}  // namespace oracle
