#pragma once

#include "dr/image.hpp"

namespace dr::fusion {

struct FeatherSpec {
  double radius = 5.0;  // pixels; 0 disables softening
};

// Gaussian-softens a mask (sigma = radius/2). Values stay in [0,1]; a mask
// that is all ones stays all ones (replicate padding saturates the interior).
Mask feather_mask(const Mask& mask, const FeatherSpec& spec);

// Per-pixel linear blend: out = (1-m)*base + m*patch, computed in float and
// rounded half-to-even on 8-bit output. Throws DimensionMismatch.
ImageBuffer composite(const ImageBuffer& base, const ImageBuffer& patch,
                      const Mask& mask);

// Mean absolute luminance gradient of the composite across the mask's 0.5
// level set; 0 when the level set is empty (all-zero or all-one masks).
double seam_energy(const ImageBuffer& base, const ImageBuffer& patch,
                   const Mask& mask);

}  // namespace dr::fusion
