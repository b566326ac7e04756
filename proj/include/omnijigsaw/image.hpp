#pragma once

#include <cstdint>
#include <vector>

#include "omnijigsaw/types.hpp"

namespace omnijigsaw::image {

/// Bilinear resample with half-pixel centers and edge clamping. Channel values
/// are rounded to 8 bits. The timestamp is carried over.
Frame resize_bilinear(const Frame& src, int width, int height);

/// ITU-R BT.601 luma, rounded to 8 bits.
std::vector<std::uint8_t> to_gray(const Frame& frame);

/// Resize then grayscale, the order used by the static-scene check.
std::vector<std::uint8_t> gray_thumbnail(const Frame& frame, int side);

/// Binary PPM (P6) encoding, used for media parts of inference requests.
std::vector<std::uint8_t> encode_ppm(const Frame& frame);

}  // namespace omnijigsaw::image
