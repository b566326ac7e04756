#include "omnijigsaw/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "omnijigsaw/error.hpp"

namespace omnijigsaw::image {
namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> taps_for(int src_len, int dst_len) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst_len));
  const double scale = static_cast<double>(src_len) / dst_len;
  for (int d = 0; d < dst_len; ++d) {
    double x = (d + 0.5) * scale - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(src_len - 1));
    const int lo = static_cast<int>(std::floor(x));
    const int hi = std::min(lo + 1, src_len - 1);
    taps[static_cast<std::size_t>(d)] = {lo, hi, x - lo};
  }
  return taps;
}

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

Frame resize_bilinear(const Frame& src, int width, int height) {
  if (width <= 0 || height <= 0 || src.width <= 0 || src.height <= 0)
    throw Error(ErrorCode::InvalidArgument, "resize dimensions must be positive");
  Frame out;
  out.width = width;
  out.height = height;
  out.timestamp_s = src.timestamp_s;
  if (width == src.width && height == src.height) {
    out.rgb = src.rgb;
    return out;
  }
  out.rgb.resize(static_cast<std::size_t>(width) * height * 3);
  const auto xt = taps_for(src.width, width);
  const auto yt = taps_for(src.height, height);
  const auto at = [&](int x, int y, int c) -> double {
    return src.rgb[(static_cast<std::size_t>(y) * src.width + x) * 3 + c];
  };
  for (int y = 0; y < height; ++y) {
    const Tap& ty = yt[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xt[static_cast<std::size_t>(x)];
      for (int c = 0; c < 3; ++c) {
        const double top = at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + at(tx.hi, ty.lo, c) * tx.frac;
        const double bot = at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + at(tx.hi, ty.hi, c) * tx.frac;
        out.rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c] = to_u8(top * (1.0 - ty.frac) + bot * ty.frac);
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> to_gray(const Frame& frame) {
  std::vector<std::uint8_t> gray(frame.pixel_count());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double r = frame.rgb[i * 3];
    const double g = frame.rgb[i * 3 + 1];
    const double b = frame.rgb[i * 3 + 2];
    gray[i] = to_u8(0.299 * r + 0.587 * g + 0.114 * b);
  }
  return gray;
}

std::vector<std::uint8_t> gray_thumbnail(const Frame& frame, int side) {
  return to_gray(resize_bilinear(frame, side, side));
}

std::vector<std::uint8_t> encode_ppm(const Frame& frame) {
  const std::string header = "P6\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.rgb.begin(), frame.rgb.end());
  return out;
}

}  // namespace omnijigsaw::image
