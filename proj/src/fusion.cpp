#include "dr/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dr/color.hpp"
#include "dr/convolve.hpp"
#include "dr/error.hpp"
#include "dr/kernels.hpp"

namespace dr::fusion {

Mask feather_mask(const Mask& mask, const FeatherSpec& spec) {
  if (spec.radius <= 0.0) return mask;
  std::vector<float> values(mask.values().begin(), mask.values().end());
  gaussian_blur_plane(values, mask.width(), mask.height(), spec.radius / 2.0);
  for (float& v : values) v = std::clamp(v, 0.0f, 1.0f);
  return Mask::from_values(mask.width(), mask.height(), mask.kind(),
                           std::move(values));
}

ImageBuffer composite(const ImageBuffer& base, const ImageBuffer& patch,
                      const Mask& mask) {
  if (!base.same_shape(patch) || base.depth() != patch.depth() ||
      !mask.matches(base)) {
    throw Error(ErrorKind::DimensionMismatch,
                "composite inputs must share dimensions");
  }
  const auto& ops = kernels::active();
  const int ch = base.channels();
  const size_t n = base.sample_count();

  std::vector<float> mexp(n);
  const auto mv = mask.values();
  for (size_t i = 0; i < mv.size(); ++i) {
    for (int c = 0; c < ch; ++c) mexp[i * ch + c] = mv[i];
  }

  const ImageBuffer basef = base.depth() == Depth::F32 ? base : base.to_float();
  const ImageBuffer patchf =
      patch.depth() == Depth::F32 ? patch : patch.to_float();
  std::vector<float> out(n);
  ops.blend(basef.f32().data(), patchf.f32().data(), mexp.data(), out.data(),
            n);
  ImageBuffer blended = ImageBuffer::from_f32(base.width(), base.height(), ch,
                                              std::move(out));
  return base.depth() == Depth::U8 ? blended.to_u8() : blended;
}

double seam_energy(const ImageBuffer& base, const ImageBuffer& patch,
                   const Mask& mask) {
  const ImageBuffer comp = composite(base, patch, mask);
  const std::vector<float> luma = luma_plane_255(comp);
  const int w = mask.width(), h = mask.height();
  auto inside = [&](int x, int y) { return mask.at(x, y) >= 0.5f; };

  double total = 0.0;
  long crossings = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w && inside(x, y) != inside(x + 1, y)) {
        total += std::abs(double(luma[size_t(y) * w + x + 1]) -
                          luma[size_t(y) * w + x]);
        ++crossings;
      }
      if (y + 1 < h && inside(x, y) != inside(x, y + 1)) {
        total += std::abs(double(luma[size_t(y + 1) * w + x]) -
                          luma[size_t(y) * w + x]);
        ++crossings;
      }
    }
  }
  return crossings == 0 ? 0.0 : total / double(crossings);
}

}  // namespace dr::fusion
