#include "dr/color.hpp"

#include <algorithm>
#include <cmath>

namespace dr {

namespace {
constexpr double kWr = 0.299;
constexpr double kWg = 0.587;
constexpr double kWb = 0.114;
}  // namespace

ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  const size_t n = img.pixel_count();
  if (img.depth() == Depth::U8) {
    const auto src = img.u8();
    std::vector<uint8_t> out(n);
    for (size_t i = 0; i < n; ++i) {
      const double l = kWr * src[i * 3] + kWg * src[i * 3 + 1] +
                       kWb * src[i * 3 + 2];
      out[i] = static_cast<uint8_t>(
          std::min(255.0, std::max(0.0, std::nearbyint(l))));
    }
    return ImageBuffer::from_u8(img.width(), img.height(), 1, std::move(out));
  }
  const auto src = img.f32();
  std::vector<float> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = static_cast<float>(kWr * src[i * 3] + kWg * src[i * 3 + 1] +
                                kWb * src[i * 3 + 2]);
  return ImageBuffer::from_f32(img.width(), img.height(), 1, std::move(out));
}

std::vector<float> luma_plane_255(const ImageBuffer& img) {
  const size_t n = img.pixel_count();
  std::vector<float> out(n);
  const int c = img.channels();
  if (img.depth() == Depth::U8) {
    const auto src = img.u8();
    for (size_t i = 0; i < n; ++i)
      out[i] = c == 1 ? static_cast<float>(src[i])
                      : static_cast<float>(kWr * src[i * 3] +
                                           kWg * src[i * 3 + 1] +
                                           kWb * src[i * 3 + 2]);
  } else {
    const auto src = img.f32();
    for (size_t i = 0; i < n; ++i)
      out[i] = 255.0f * (c == 1 ? src[i]
                                : static_cast<float>(kWr * src[i * 3] +
                                                     kWg * src[i * 3 + 1] +
                                                     kWb * src[i * 3 + 2]));
  }
  return out;
}

std::vector<float> saturation_plane(const ImageBuffer& img) {
  const size_t n = img.pixel_count();
  std::vector<float> out(n, 0.0f);
  if (img.channels() == 1) return out;
  if (img.depth() == Depth::U8) {
    const auto src = img.u8();
    for (size_t i = 0; i < n; ++i) {
      const uint8_t r = src[i * 3], g = src[i * 3 + 1], b = src[i * 3 + 2];
      const uint8_t mx = std::max({r, g, b});
      const uint8_t mn = std::min({r, g, b});
      out[i] = mx == 0 ? 0.0f : static_cast<float>(mx - mn) / mx;
    }
  } else {
    const auto src = img.f32();
    for (size_t i = 0; i < n; ++i) {
      const float r = src[i * 3], g = src[i * 3 + 1], b = src[i * 3 + 2];
      const float mx = std::max({r, g, b});
      const float mn = std::min({r, g, b});
      out[i] = mx <= 0.0f ? 0.0f : (mx - mn) / mx;
    }
  }
  return out;
}

}  // namespace dr
